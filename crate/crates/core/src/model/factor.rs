//! Dense potentials over discrete variables.
//!
//! A [`Factor`] stores its scope sorted by [`VarId`] and its table row-major
//! over that scope, so the last variable varies fastest. Every operation
//! returns a factor in this canonical layout, which makes tables directly
//! comparable.

use super::{Assignment, VarId};
use crate::error::{Error, Result};

/// Entry encoding of a factor table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Repr {
    Linear,
    /// Natural logarithms; `-inf` encodes a zero entry.
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    Sum,
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    scope: Vec<VarId>,
    cards: Vec<usize>,
    values: Vec<f64>,
    repr: Repr,
}

fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * cards[i + 1];
    }
    s
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if m.is_infinite() {
        return m;
    }
    m + values.map(|v| (v - m).exp()).sum::<f64>().ln()
}

impl Factor {
    /// Builds a factor from a table laid out row-major over `vars` in the
    /// given order. The result is re-laid out in canonical (sorted) order.
    pub fn new(vars: &[(VarId, usize)], values: Vec<f64>, repr: Repr) -> Result<Self> {
        for (i, (v, _)) in vars.iter().enumerate() {
            if vars[..i].iter().any(|(w, _)| w == v) {
                return Err(Error::DuplicateScopeVariable(*v));
            }
        }
        let expected: usize = vars.iter().map(|&(_, c)| c).product();
        if values.len() != expected {
            return Err(Error::TableLength {
                expected,
                actual: values.len(),
            });
        }
        if repr == Repr::Linear {
            if let Some(&bad) = values.iter().find(|v| !(**v >= 0.0)) {
                return Err(Error::NegativeEntry { value: bad });
            }
        }
        let given = Factor {
            scope: vars.iter().map(|&(v, _)| v).collect(),
            cards: vars.iter().map(|&(_, c)| c).collect(),
            values,
            repr,
        };
        Ok(given.canonical())
    }

    /// Builds a factor by evaluating `f` on every joint state of `vars`.
    /// `f` receives the states in the order of `vars`.
    pub fn from_fn(
        vars: &[(VarId, usize)],
        repr: Repr,
        mut f: impl FnMut(&[usize]) -> f64,
    ) -> Result<Self> {
        let total: usize = vars.iter().map(|&(_, c)| c).product();
        let mut digits = vec![0usize; vars.len()];
        let mut values = Vec::with_capacity(total);
        for _ in 0..total {
            values.push(f(&digits));
            for i in (0..vars.len()).rev() {
                digits[i] += 1;
                if digits[i] < vars[i].1 {
                    break;
                }
                digits[i] = 0;
            }
        }
        Factor::new(vars, values, repr)
    }

    pub fn scalar(value: f64, repr: Repr) -> Self {
        Factor {
            scope: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
            repr,
        }
    }

    /// Multiplicative identity in the given representation.
    pub fn unit(repr: Repr) -> Self {
        Factor::scalar(if repr == Repr::Log { 0.0 } else { 1.0 }, repr)
    }

    fn canonical(self) -> Self {
        if self.scope.windows(2).all(|w| w[0] < w[1]) {
            return self;
        }
        let mut order: Vec<usize> = (0..self.scope.len()).collect();
        order.sort_by_key(|&i| self.scope[i]);
        let src_strides = strides(&self.cards);
        let scope: Vec<VarId> = order.iter().map(|&i| self.scope[i]).collect();
        let cards: Vec<usize> = order.iter().map(|&i| self.cards[i]).collect();
        let perm_strides: Vec<usize> = order.iter().map(|&i| src_strides[i]).collect();
        let values = gather(&cards, &perm_strides, 0, &self.values);
        Factor {
            scope,
            cards,
            values,
            repr: self.repr,
        }
    }

    pub fn scope(&self) -> &[VarId] {
        &self.scope
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn repr(&self) -> Repr {
        self.repr
    }

    pub fn contains(&self, var: VarId) -> bool {
        self.scope.binary_search(&var).is_ok()
    }

    pub fn cardinality_of(&self, var: VarId) -> Option<usize> {
        self.scope.binary_search(&var).ok().map(|i| self.cards[i])
    }

    /// `(id, cardinality)` pairs in canonical order.
    pub fn vars(&self) -> Vec<(VarId, usize)> {
        self.scope
            .iter()
            .copied()
            .zip(self.cards.iter().copied())
            .collect()
    }

    /// Value of a scalar factor, or `None` if the scope is non-empty.
    pub fn as_scalar(&self) -> Option<f64> {
        self.scope.is_empty().then(|| self.values[0])
    }

    fn index_of(&self, assignment: &Assignment) -> Result<usize> {
        let st = strides(&self.cards);
        let mut idx = 0;
        for (i, &v) in self.scope.iter().enumerate() {
            let s = assignment.get(v).ok_or(Error::Unbound(v))?;
            if s >= self.cards[i] {
                return Err(Error::StateOutOfRange {
                    var: v,
                    state: s,
                    cardinality: self.cards[i],
                });
            }
            idx += s * st[i];
        }
        Ok(idx)
    }

    /// Entry at the state of `assignment`; every scope variable must be bound.
    pub fn value(&self, assignment: &Assignment) -> Result<f64> {
        Ok(self.values[self.index_of(assignment)?])
    }

    pub fn to_log(&self) -> Factor {
        match self.repr {
            Repr::Log => self.clone(),
            Repr::Linear => self.map_values(Repr::Log, f64::ln),
        }
    }

    pub fn to_linear(&self) -> Factor {
        match self.repr {
            Repr::Linear => self.clone(),
            Repr::Log => self.map_values(Repr::Linear, f64::exp),
        }
    }

    /// Negates every entry of a log factor, which turns products of
    /// potentials into products of their reciprocals.
    pub fn negated_log(&self) -> Factor {
        debug_assert_eq!(self.repr, Repr::Log);
        self.map_values(Repr::Log, |v| -v)
    }

    fn map_values(&self, repr: Repr, f: impl Fn(f64) -> f64) -> Factor {
        Factor {
            scope: self.scope.clone(),
            cards: self.cards.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            repr,
        }
    }

    /// Linear factor scaled to sum to one. Returns `None` if the total is zero.
    pub fn normalized(&self) -> Option<Factor> {
        let lin = self.to_linear();
        let total: f64 = lin.values.iter().sum();
        (total > 0.0).then(|| lin.map_values(Repr::Linear, |v| v / total))
    }

    /// Pointwise product (sum of entries in log representation) over the
    /// union of both scopes.
    pub fn product(&self, other: &Factor) -> Result<Factor> {
        if self.repr != other.repr {
            return Err(Error::RepresentationMismatch);
        }
        let mut scope = Vec::with_capacity(self.scope.len() + other.scope.len());
        let mut cards = Vec::with_capacity(scope.capacity());
        let (mut i, mut j) = (0, 0);
        while i < self.scope.len() || j < other.scope.len() {
            let take_left =
                j >= other.scope.len() || (i < self.scope.len() && self.scope[i] <= other.scope[j]);
            if take_left
                && j < other.scope.len()
                && i < self.scope.len()
                && self.scope[i] == other.scope[j]
            {
                if self.cards[i] != other.cards[j] {
                    return Err(Error::CardinalityMismatch {
                        var: self.scope[i],
                        left: self.cards[i],
                        right: other.cards[j],
                    });
                }
                scope.push(self.scope[i]);
                cards.push(self.cards[i]);
                i += 1;
                j += 1;
            } else if take_left {
                scope.push(self.scope[i]);
                cards.push(self.cards[i]);
                i += 1;
            } else {
                scope.push(other.scope[j]);
                cards.push(other.cards[j]);
                j += 1;
            }
        }
        let sa = aligned_strides(&scope, &self.scope, &self.cards);
        let sb = aligned_strides(&scope, &other.scope, &other.cards);
        let total: usize = cards.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut digits = vec![0usize; scope.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        let log = self.repr == Repr::Log;
        for _ in 0..total {
            let (a, b) = (self.values[ia], other.values[ib]);
            values.push(if log { a + b } else { a * b });
            for d in (0..scope.len()).rev() {
                digits[d] += 1;
                ia += sa[d];
                ib += sb[d];
                if digits[d] < cards[d] {
                    break;
                }
                digits[d] = 0;
                ia -= sa[d] * cards[d];
                ib -= sb[d] * cards[d];
            }
        }
        Ok(Factor {
            scope,
            cards,
            values,
            repr: self.repr,
        })
    }

    /// Removes `var` from the scope by summing, maximising or minimising
    /// over its states. Log-representation sums use log-sum-exp.
    pub fn reduce(&self, var: VarId, mode: Reduction) -> Result<Factor> {
        let p = self
            .scope
            .binary_search(&var)
            .map_err(|_| Error::NotInScope(var))?;
        let k = self.cards[p];
        let inner: usize = self.cards[p + 1..].iter().product();
        let outer: usize = self.cards[..p].iter().product();
        let mut values = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            for n in 0..inner {
                let base = o * k * inner + n;
                let column = (0..k).map(|s| self.values[base + s * inner]);
                let v = match (mode, self.repr) {
                    (Reduction::Sum, Repr::Linear) => column.sum(),
                    (Reduction::Sum, Repr::Log) => log_sum_exp(column),
                    (Reduction::Max, _) => column.fold(f64::NEG_INFINITY, f64::max),
                    (Reduction::Min, _) => column.fold(f64::INFINITY, f64::min),
                };
                values.push(v);
            }
        }
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        scope.remove(p);
        cards.remove(p);
        Ok(Factor {
            scope,
            cards,
            values,
            repr: self.repr,
        })
    }

    /// Max-reduces `var` and also returns, for every entry of the result,
    /// the lowest state of `var` attaining the maximum.
    pub fn reduce_max_with_argmax(&self, var: VarId) -> Result<(Factor, Vec<usize>)> {
        let p = self
            .scope
            .binary_search(&var)
            .map_err(|_| Error::NotInScope(var))?;
        let k = self.cards[p];
        let inner: usize = self.cards[p + 1..].iter().product();
        let outer: usize = self.cards[..p].iter().product();
        let mut values = Vec::with_capacity(outer * inner);
        let mut arg = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            for n in 0..inner {
                let base = o * k * inner + n;
                let (mut best, mut best_s) = (self.values[base], 0);
                for s in 1..k {
                    let v = self.values[base + s * inner];
                    if v > best {
                        best = v;
                        best_s = s;
                    }
                }
                values.push(best);
                arg.push(best_s);
            }
        }
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        scope.remove(p);
        cards.remove(p);
        Ok((
            Factor {
                scope,
                cards,
                values,
                repr: self.repr,
            },
            arg,
        ))
    }

    /// Slices the table at the evidence states. Evidence on variables outside
    /// the scope is ignored.
    pub fn restrict(&self, evidence: &Assignment) -> Result<Factor> {
        let st = strides(&self.cards);
        let mut base = 0;
        let mut kept = Vec::new();
        for (i, &v) in self.scope.iter().enumerate() {
            match evidence.get(v) {
                Some(s) if s >= self.cards[i] => {
                    return Err(Error::StateOutOfRange {
                        var: v,
                        state: s,
                        cardinality: self.cards[i],
                    })
                }
                Some(s) => base += s * st[i],
                None => kept.push(i),
            }
        }
        if kept.len() == self.scope.len() {
            return Ok(self.clone());
        }
        let cards: Vec<usize> = kept.iter().map(|&i| self.cards[i]).collect();
        let kept_strides: Vec<usize> = kept.iter().map(|&i| st[i]).collect();
        Ok(Factor {
            scope: kept.iter().map(|&i| self.scope[i]).collect(),
            values: gather(&cards, &kept_strides, base, &self.values),
            cards,
            repr: self.repr,
        })
    }
}

/// For each variable of `target`, the stride it has in a table over
/// `(scope, cards)`, or 0 if absent.
fn aligned_strides(target: &[VarId], scope: &[VarId], cards: &[usize]) -> Vec<usize> {
    let st = strides(cards);
    target
        .iter()
        .map(|v| scope.binary_search(v).map(|i| st[i]).unwrap_or(0))
        .collect()
}

/// Reads `source` in row-major order over `cards` where digit `d` moves the
/// source index by `src_strides[d]`.
fn gather(cards: &[usize], src_strides: &[usize], base: usize, source: &[f64]) -> Vec<f64> {
    let total: usize = cards.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; cards.len()];
    let mut idx = base;
    for _ in 0..total {
        out.push(source[idx]);
        for d in (0..cards.len()).rev() {
            digits[d] += 1;
            idx += src_strides[d];
            if digits[d] < cards[d] {
                break;
            }
            digits[d] = 0;
            idx -= src_strides[d] * cards[d];
        }
    }
    out
}

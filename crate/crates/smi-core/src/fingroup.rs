//! Finite groups given by explicit multiplication tables.
//!
//! Element 0 is always the identity. Construction checks the full set of
//! group laws, so everything downstream can assume a genuine group.

use crate::error::{Error, Result};

pub type ElemId = usize;

/// A finite group: order, multiplication table, inverse table, element names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    mul: Vec<Vec<ElemId>>,
    inv: Vec<ElemId>,
    names: Vec<String>,
}

impl FiniteGroup {
    /// Validates a multiplication table (identity must be element 0) and
    /// derives the inverse table.
    pub fn from_table(mul: Vec<Vec<ElemId>>, names: Option<Vec<String>>) -> Result<Self> {
        let order = mul.len();
        if order == 0 {
            return Err(Error::EmptyGroup);
        }
        for (i, row) in mul.iter().enumerate() {
            if row.len() != order {
                return Err(Error::TableNotSquare { row: i, len: row.len(), order });
            }
            for (j, &x) in row.iter().enumerate() {
                if x >= order {
                    return Err(Error::TableEntryOutOfRange(i, j, x));
                }
            }
        }
        for a in 0..order {
            if mul[0][a] != a {
                return Err(Error::IdentityLawFails(0, a));
            }
            if mul[a][0] != a {
                return Err(Error::IdentityLawFails(a, 0));
            }
        }
        let mut inv = vec![usize::MAX; order];
        for a in 0..order {
            match (0..order).find(|&b| mul[a][b] == 0 && mul[b][a] == 0) {
                Some(b) => inv[a] = b,
                None => return Err(Error::NoInverse(a)),
            }
        }
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                        return Err(Error::AssociativityFails(a, b, c));
                    }
                }
            }
        }
        let names = match names {
            Some(names) => {
                if names.len() != order {
                    return Err(Error::Config(format!(
                        "expected {order} element names, got {}",
                        names.len()
                    )));
                }
                names
            }
            None => (0..order).map(|i| format!("g{i}")).collect(),
        };
        Ok(FiniteGroup { order, mul, inv, names })
    }

    /// Cyclic group of order `n`, elements named `e, t, t2, ..`.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGroup);
        }
        let mul = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        let names = (0..n)
            .map(|i| match i {
                0 => "e".to_string(),
                1 => "t".to_string(),
                k => format!("t{k}"),
            })
            .collect();
        Self::from_table(mul, Some(names))
    }

    /// The one-element group.
    pub fn trivial() -> Self {
        Self::cyclic(1).expect("order 1")
    }

    /// Direct product, elements ordered by `a * other.order + b` and named `a.b`.
    pub fn direct_product(&self, other: &FiniteGroup) -> Self {
        let n = self.order * other.order;
        let enc = |a: usize, b: usize| a * other.order + b;
        let mut mul = vec![vec![0; n]; n];
        for a1 in 0..self.order {
            for b1 in 0..other.order {
                for a2 in 0..self.order {
                    for b2 in 0..other.order {
                        mul[enc(a1, b1)][enc(a2, b2)] = enc(self.mul(a1, a2), other.mul(b1, b2));
                    }
                }
            }
        }
        let mut names = Vec::with_capacity(n);
        for a in 0..self.order {
            for b in 0..other.order {
                names.push(format!("{}.{}", self.names[a], other.names[b]));
            }
        }
        Self::from_table(mul, Some(names)).expect("product of groups is a group")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Structural identity of the multiplication tables, ignoring names.
    pub fn same_table(&self, other: &FiniteGroup) -> bool {
        self.mul == other.mul
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    pub fn mul(&self, a: ElemId, b: ElemId) -> ElemId {
        self.mul[a][b]
    }

    pub fn inv(&self, a: ElemId) -> ElemId {
        self.inv[a]
    }

    pub fn elem_name(&self, a: ElemId) -> &str {
        &self.names[a]
    }

    pub fn elem_names(&self) -> &[String] {
        &self.names
    }

    /// Resolves an element given by index string or name.
    pub fn resolve(&self, token: &str) -> Result<ElemId> {
        if let Ok(idx) = token.parse::<usize>() {
            if idx < self.order {
                return Ok(idx);
            }
            return Err(Error::ElementOutOfRange { elem: idx, order: self.order });
        }
        self.names
            .iter()
            .position(|n| n == token)
            .ok_or_else(|| Error::UnknownElement(token.to_string()))
    }

    pub fn check_elem(&self, a: ElemId) -> Result<()> {
        if a < self.order {
            Ok(())
        } else {
            Err(Error::ElementOutOfRange { elem: a, order: self.order })
        }
    }

    /// Product of a slice of elements, left to right.
    pub fn product(&self, elems: &[ElemId]) -> ElemId {
        elems.iter().fold(0, |acc, &e| self.mul(acc, e))
    }
}

//! Exact time values: rational bounds with strictness and static firing intervals.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg};

use num_traits::{Signed, Zero};
use thiserror::Error;

/// Exact rational time value. Bound arithmetic never touches floating point.
pub type Rational = num_rational::Ratio<i64>;

/// A bound `≤ value` (or `< value` when strict), or no bound at all.
///
/// The same type is used for interval endpoints and for DBM entries. As a DBM
/// entry `(i, j)` it reads `x_i − x_j ≤ value` (`<` when strict).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bound {
    Finite { value: Rational, strict: bool },
    Infinite,
}

impl Bound {
    pub const ZERO: Bound = Bound::Finite {
        value: Rational::new_raw(0, 1),
        strict: false,
    };

    pub fn le(value: Rational) -> Self {
        Bound::Finite {
            value,
            strict: false,
        }
    }

    pub fn lt(value: Rational) -> Self {
        Bound::Finite {
            value,
            strict: true,
        }
    }

    pub fn le_int(value: i64) -> Self {
        Self::le(Rational::from_integer(value))
    }

    pub fn value(&self) -> Option<Rational> {
        match self {
            Bound::Finite { value, .. } => Some(*value),
            Bound::Infinite => None,
        }
    }

    pub fn is_strict(&self) -> bool {
        matches!(self, Bound::Finite { strict: true, .. })
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Bound::Infinite)
    }

    /// True when this bound, used as a cycle weight, makes a difference system
    /// infeasible: `< 0`, or `< 0` in the strict sense at value zero.
    pub fn is_negative_cycle(&self) -> bool {
        match self {
            Bound::Finite { value, strict } => {
                value.is_negative() || (value.is_zero() && *strict)
            }
            Bound::Infinite => false,
        }
    }
}

impl Ord for Bound {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Bound::Infinite, Bound::Infinite) => Ordering::Equal,
            (Bound::Infinite, _) => Ordering::Greater,
            (_, Bound::Infinite) => Ordering::Less,
            (
                Bound::Finite {
                    value: a,
                    strict: sa,
                },
                Bound::Finite {
                    value: b,
                    strict: sb,
                },
            ) => a.cmp(b).then_with(|| match (sa, sb) {
                // `< v` is tighter than `≤ v`
                (true, false) => Ordering::Less,
                (false, true) => Ordering::Greater,
                _ => Ordering::Equal,
            }),
        }
    }
}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Bound {
    type Output = Bound;

    fn add(self, rhs: Bound) -> Bound {
        match (self, rhs) {
            (
                Bound::Finite {
                    value: a,
                    strict: sa,
                },
                Bound::Finite {
                    value: b,
                    strict: sb,
                },
            ) => {
                // integer fast path skips the gcd normalisation
                let value = if a.is_integer() && b.is_integer() {
                    Rational::new_raw(a.numer() + b.numer(), 1)
                } else {
                    a + b
                };
                Bound::Finite {
                    value,
                    strict: sa || sb,
                }
            }
            _ => Bound::Infinite,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite { value, strict } => {
                write!(f, "{}{}", if *strict { "<" } else { "≤" }, value)
            }
            Bound::Infinite => write!(f, "∞"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntervalError {
    #[error("interval lower endpoint must be finite and non-negative")]
    InvalidLower,
    #[error("empty interval: lower endpoint exceeds upper endpoint, or equal endpoints with an open end")]
    Empty,
}

/// A static firing interval. The lower endpoint is finite and non-negative;
/// the upper endpoint may be unbounded (always open when unbounded).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TimeInterval {
    lower: Rational,
    lower_strict: bool,
    upper: Bound,
}

impl TimeInterval {
    pub fn new(lower: Rational, lower_strict: bool, upper: Bound) -> Result<Self, IntervalError> {
        if lower.is_negative() {
            return Err(IntervalError::InvalidLower);
        }
        if let Bound::Finite {
            value,
            strict: upper_strict,
        } = upper
        {
            match lower.cmp(&value) {
                Ordering::Greater => return Err(IntervalError::Empty),
                Ordering::Equal if lower_strict || upper_strict => {
                    return Err(IntervalError::Empty)
                }
                _ => {}
            }
        }
        Ok(TimeInterval {
            lower,
            lower_strict,
            upper,
        })
    }

    /// `[lower, upper]` with integer endpoints.
    pub fn closed(lower: i64, upper: i64) -> Result<Self, IntervalError> {
        Self::new(
            Rational::from_integer(lower),
            false,
            Bound::le_int(upper),
        )
    }

    /// `[lower, ∞)`.
    pub fn at_least(lower: i64) -> Result<Self, IntervalError> {
        Self::new(Rational::from_integer(lower), false, Bound::Infinite)
    }

    /// The default interval `[0, ∞)`.
    pub fn unbounded() -> Self {
        TimeInterval {
            lower: Rational::new_raw(0, 1),
            lower_strict: false,
            upper: Bound::Infinite,
        }
    }

    pub fn lower(&self) -> Rational {
        self.lower
    }

    pub fn lower_strict(&self) -> bool {
        self.lower_strict
    }

    pub fn upper(&self) -> Bound {
        self.upper
    }

    pub fn is_default(&self) -> bool {
        *self == Self::unbounded()
    }

    /// DBM entry `x0 − x ≤ −lower` encoding the lower endpoint.
    pub fn neg_lower_bound(&self) -> Bound {
        Bound::Finite {
            value: self.lower.neg(),
            strict: self.lower_strict,
        }
    }

    /// Closed with integer endpoints (upper may be unbounded).
    pub fn is_closed_integer(&self) -> bool {
        let upper_ok = match self.upper {
            Bound::Finite { value, strict } => !strict && value.is_integer(),
            Bound::Infinite => true,
        };
        !self.lower_strict && self.lower.is_integer() && upper_ok
    }
}

impl Default for TimeInterval {
    fn default() -> Self {
        Self::unbounded()
    }
}

pub(crate) fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Renders in the net file syntax: `[a,b]`, `]a,b]`, `[a,w[` …
impl fmt::Display for TimeInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lower_strict { ']' } else { '[' };
        match self.upper {
            Bound::Finite { value, strict } => write!(
                f,
                "{}{},{}{}",
                open,
                fmt_rational(&self.lower),
                fmt_rational(&value),
                if strict { '[' } else { ']' }
            ),
            Bound::Infinite => write!(f, "{}{},w[", open, fmt_rational(&self.lower)),
        }
    }
}

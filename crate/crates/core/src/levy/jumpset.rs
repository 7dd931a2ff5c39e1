use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Interval of jump sizes; endpoints may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn open(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed {
            x >= self.lo
        } else {
            x > self.lo
        };
        let below = if self.hi_closed {
            x <= self.hi
        } else {
            x < self.hi
        };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let (lo, lo_closed) = if self.lo > other.lo {
            (self.lo, self.lo_closed)
        } else if other.lo > self.lo {
            (other.lo, other.lo_closed)
        } else {
            (self.lo, self.lo_closed && other.lo_closed)
        };
        let (hi, hi_closed) = if self.hi < other.hi {
            (self.hi, self.hi_closed)
        } else if other.hi < self.hi {
            (other.hi, other.hi_closed)
        } else {
            (self.hi, self.hi_closed && other.hi_closed)
        };
        Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        }
    }

    fn covers(&self, other: &Interval) -> bool {
        let lo_ok =
            self.lo < other.lo || (self.lo == other.lo && (self.lo_closed || !other.lo_closed));
        let hi_ok =
            self.hi > other.hi || (self.hi == other.hi && (self.hi_closed || !other.hi_closed));
        lo_ok && hi_ok
    }
}

/// A Borel set of jump sizes: an optional point at zero (the Gaussian
/// direction) plus a finite union of intervals in ℝ∖{0}.
///
/// Used both for the derivative direction set and for jump-size
/// restrictions (which never include zero).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpSet {
    pub includes_zero: bool,
    pub intervals: Vec<Interval>,
}

impl JumpSet {
    pub fn new(includes_zero: bool, intervals: Vec<Interval>) -> Result<Self> {
        for iv in &intervals {
            if iv.lo.is_nan() || iv.hi.is_nan() {
                return Err(invalid("intervals", "NaN endpoint"));
            }
            if iv.contains_zero() {
                return Err(invalid("intervals", format!("interval {iv:?} contains 0")));
            }
        }
        let intervals = intervals.into_iter().filter(|iv| !iv.is_empty()).collect();
        Ok(Self {
            includes_zero,
            intervals,
        })
    }

    /// ℝ∖{0}.
    pub fn nonzero() -> Self {
        Self {
            includes_zero: false,
            intervals: vec![
                Interval::open(f64::NEG_INFINITY, 0.0),
                Interval::open(0.0, f64::INFINITY),
            ],
        }
    }

    /// All of ℝ: the Gaussian direction together with every jump size.
    pub fn everything() -> Self {
        Self {
            includes_zero: true,
            ..Self::nonzero()
        }
    }

    /// {0}: only the Brownian direction.
    pub fn zero() -> Self {
        Self {
            includes_zero: true,
            intervals: Vec::new(),
        }
    }

    pub fn empty() -> Self {
        Self {
            includes_zero: false,
            intervals: Vec::new(),
        }
    }

    /// {x : lo < |x| < hi}.
    pub fn annulus(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && hi > lo) {
            return Err(invalid(
                "annulus",
                format!("need 0 <= lo < hi, got ({lo}, {hi})"),
            ));
        }
        Self::new(
            false,
            vec![Interval::open(-hi, -lo), Interval::open(lo, hi)],
        )
    }

    /// The single jump size `x`.
    pub fn point(x: f64) -> Result<Self> {
        Self::new(false, vec![Interval::closed(x, x)])
    }

    pub fn with_zero(mut self) -> Self {
        self.includes_zero = true;
        self
    }

    pub fn contains(&self, x: f64) -> bool {
        if x == 0.0 {
            return self.includes_zero;
        }
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    /// Membership of a nonzero jump size (ignores the zero flag).
    pub fn contains_jump(&self, x: f64) -> bool {
        x != 0.0 && self.intervals.iter().any(|iv| iv.contains(x))
    }

    pub fn intersect(&self, other: &JumpSet) -> JumpSet {
        let mut intervals = Vec::new();
        for a in &self.intervals {
            for b in &other.intervals {
                let c = a.intersect(b);
                if !c.is_empty() {
                    intervals.push(c);
                }
            }
        }
        JumpSet {
            includes_zero: self.includes_zero && other.includes_zero,
            intervals,
        }
    }

    /// Sufficient check of `other ⊂ self` on the nonzero part: each interval of
    /// `other` must sit inside a single interval of `self`.
    pub fn covers(&self, other: &JumpSet) -> bool {
        other
            .intervals
            .iter()
            .all(|b| self.intervals.iter().any(|a| a.covers(b)))
    }

    /// Distance from the nonzero part of the set to the origin.
    pub fn gap_from_zero(&self) -> f64 {
        self.intervals
            .iter()
            .map(|iv| {
                if iv.lo >= 0.0 {
                    iv.lo
                } else if iv.hi <= 0.0 {
                    -iv.hi
                } else {
                    0.0
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// True when the closure of the set excludes 0 and the set is bounded.
    pub fn bounded_away_from_zero(&self) -> bool {
        self.gap_from_zero() > 0.0
            && self
                .intervals
                .iter()
                .all(|iv| iv.lo.is_finite() && iv.hi.is_finite())
    }

    /// Intersection of the nonzero part with the segment `[a, b]`, as closed pieces.
    pub fn clip(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self
            .intervals
            .iter()
            .filter_map(|iv| {
                let lo = iv.lo.max(a);
                let hi = iv.hi.min(b);
                (hi > lo).then_some((lo, hi))
            })
            .collect();
        out.sort_by(|x, y| x.0.total_cmp(&y.0));
        out
    }
}

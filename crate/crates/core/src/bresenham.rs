//! Exact integer Bresenham recursion, extended to lattice points off the
//! canonical path.
//!
//! A walk moves one column at a time. At every column the sign of an integer
//! decision variable picks either a horizontal move ([`Movement::M1`]) or a
//! diagonal one ([`Movement::M2`]). The decision variable only depends on how
//! many diagonal moves were taken, not on their order, so it can be evaluated
//! directly at any lattice point with [`otd`] and a walk can be resumed from
//! there. Walks started from any point that can still reach a point on the
//! canonical path converge onto that path.
//!
//! Two constant offsets for the extended decision variable are supported, see
//! [`Convention`].

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::LatticeInt;

/// Lattice line parameters: `delta_a` columns, `delta_b` rows, `0 < delta_b < delta_a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Slope<T> {
    delta_a: T,
    delta_b: T,
}

impl<T: LatticeInt> Slope<T> {
    pub fn new(delta_a: T, delta_b: T) -> Result<Self> {
        let max = T::from_u32(u32::MAX).unwrap_or_else(T::max_value);
        if delta_b > T::zero() && delta_b < delta_a && delta_a <= max {
            Ok(Self { delta_a, delta_b })
        } else {
            Err(Error::InvalidSlope {
                delta_a: delta_a.to_string(),
                delta_b: delta_b.to_string(),
            })
        }
    }

    #[inline]
    pub fn delta_a(&self) -> T {
        self.delta_a
    }

    #[inline]
    pub fn delta_b(&self) -> T {
        self.delta_b
    }

    #[inline]
    fn two(&self) -> T {
        T::one() + T::one()
    }
}

/// A point of the (hardware clock, logical clock) lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticePoint<T> {
    pub x: T,
    pub y: T,
}

impl<T: LatticeInt> LatticePoint<T> {
    pub fn new(x: T, y: T) -> Result<Self> {
        if y >= T::zero() && y <= x {
            Ok(Self { x, y })
        } else {
            Err(Error::InvalidPoint {
                x: x.to_string(),
                y: y.to_string(),
            })
        }
    }

    pub fn origin() -> Self {
        Self {
            x: T::zero(),
            y: T::zero(),
        }
    }
}

impl<T: fmt::Display> fmt::Display for LatticePoint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Constant offset of the extended decision variable.
///
/// The closed form `2(x·Δb - y·Δa)` is `2Δb - Δa` smaller than the recursive
/// decision variable on the canonical path (the recursion starts at `2Δb - Δa`
/// at the origin, the closed form at 0). `TdConsistent` adds the offset back so
/// both agree on every canonical point; `ClosedForm` keeps the bare closed form,
/// which tracks the line shifted by half a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Convention {
    ClosedForm,
    #[default]
    TdConsistent,
}

impl Convention {
    fn offset<T: LatticeInt>(self, slope: &Slope<T>) -> T {
        match self {
            Convention::ClosedForm => T::zero(),
            Convention::TdConsistent => slope.two() * slope.delta_b - slope.delta_a,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Convention::ClosedForm => "closed-form",
            Convention::TdConsistent => "td",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Convention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "closed-form" | "bare" => Ok(Convention::ClosedForm),
            "td" | "td-consistent" => Ok(Convention::TdConsistent),
            other => Err(format!("unknown decision-variable convention `{other}`")),
        }
    }
}

/// Which move a zero decision variable takes.
///
/// `Diagonal` is the standard rule (`td >= 0` moves diagonally) and rounds the
/// exact-half case up. `Horizontal` rounds it down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TieRule {
    #[default]
    Diagonal,
    Horizontal,
}

impl TieRule {
    #[inline]
    fn takes_diagonal<T: LatticeInt>(self, value: T) -> bool {
        match self {
            TieRule::Diagonal => value >= T::zero(),
            TieRule::Horizontal => value > T::zero(),
        }
    }
}

/// Decision variable together with the convention it was evaluated under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DecisionVar<T> {
    pub value: T,
    pub convention: Convention,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Movement {
    /// `x + 1`
    M1,
    /// `x + 1, y + 1`
    M2,
}

impl Movement {
    #[inline]
    pub fn rise<T: LatticeInt>(self) -> T {
        match self {
            Movement::M1 => T::zero(),
            Movement::M2 => T::one(),
        }
    }
}

/// Decision variable at the origin: `2Δb - Δa`.
pub fn initial_td<T: LatticeInt>(slope: &Slope<T>) -> DecisionVar<T> {
    DecisionVar {
        value: slope.two() * slope.delta_b - slope.delta_a,
        convention: Convention::TdConsistent,
    }
}

/// One Bresenham step with the standard tie rule.
pub fn step<T: LatticeInt>(td: DecisionVar<T>, slope: &Slope<T>) -> (Movement, DecisionVar<T>) {
    step_with(td, slope, TieRule::Diagonal)
}

pub fn step_with<T: LatticeInt>(
    td: DecisionVar<T>,
    slope: &Slope<T>,
    tie: TieRule,
) -> (Movement, DecisionVar<T>) {
    let two_b = slope.two() * slope.delta_b;
    if tie.takes_diagonal(td.value) {
        let value = td.value + two_b - slope.two() * slope.delta_a;
        (Movement::M2, DecisionVar { value, ..td })
    } else {
        (Movement::M1, DecisionVar { value: td.value + two_b, ..td })
    }
}

/// `2(x·Δb - y·Δa) + offset` with overflow checks; coordinates may be negative.
fn raw_decision<T: LatticeInt>(x: T, y: T, slope: &Slope<T>, convention: Convention) -> Option<T> {
    let along = x.checked_mul(&slope.delta_b)?;
    let across = y.checked_mul(&slope.delta_a)?;
    along
        .checked_sub(&across)?
        .checked_mul(&slope.two())?
        .checked_add(&convention.offset(slope))
}

/// Extended decision variable evaluated directly at `point`.
pub fn otd<T: LatticeInt>(
    point: &LatticePoint<T>,
    slope: &Slope<T>,
    convention: Convention,
) -> Result<DecisionVar<T>> {
    raw_decision(point.x, point.y, slope, convention)
        .map(|value| DecisionVar { value, convention })
        .ok_or_else(|| Error::Overflow {
            x: point.x.to_string(),
        })
}

/// Whether `point` lies on the walk that starts at the origin under the given
/// convention and tie rule.
///
/// Uses only the decision variable of the diagonal predecessor `(x-1, y-1)`:
/// the point is on the path iff that value lies in `[0, 2Δa)` (diagonal ties)
/// or `(0, 2Δa]` (horizontal ties).
pub fn is_on_path<T: LatticeInt>(
    point: &LatticePoint<T>,
    slope: &Slope<T>,
    convention: Convention,
    tie: TieRule,
) -> Result<bool> {
    let pred = raw_decision(point.x - T::one(), point.y - T::one(), slope, convention).ok_or_else(
        || Error::Overflow {
            x: point.x.to_string(),
        },
    )?;
    let span = slope.two() * slope.delta_a;
    Ok(match tie {
        TieRule::Diagonal => pred >= T::zero() && pred < span,
        TieRule::Horizontal => pred > T::zero() && pred <= span,
    })
}

/// Endless walk; yields the current point and its decision variable, then moves.
#[derive(Debug, Clone)]
pub struct Walk<T> {
    point: LatticePoint<T>,
    td: DecisionVar<T>,
    slope: Slope<T>,
    tie: TieRule,
}

impl<T: LatticeInt> Walk<T> {
    pub fn point(&self) -> LatticePoint<T> {
        self.point
    }

    pub fn decision(&self) -> DecisionVar<T> {
        self.td
    }

    /// Applies one movement and returns it.
    #[inline]
    pub fn advance(&mut self) -> Movement {
        let (mv, next) = step_with(self.td, &self.slope, self.tie);
        self.point.x = self.point.x + T::one();
        self.point.y = self.point.y + mv.rise();
        self.td = next;
        mv
    }
}

impl<T: LatticeInt> Iterator for Walk<T> {
    type Item = (LatticePoint<T>, DecisionVar<T>);

    fn next(&mut self) -> Option<Self::Item> {
        let current = (self.point, self.td);
        self.advance();
        Some(current)
    }
}

/// Starts a walk at an arbitrary lattice point.
pub fn walk_from<T: LatticeInt>(
    start: LatticePoint<T>,
    slope: &Slope<T>,
    convention: Convention,
    tie: TieRule,
) -> Result<Walk<T>> {
    let td = otd(&start, slope, convention)?;
    Ok(Walk {
        point: start,
        td,
        slope: *slope,
        tie,
    })
}

/// Canonical path from the origin: `y` for every `x` in `0..=x_max`.
///
/// Driven purely by [`initial_td`] and [`step`]; the line repeats with period
/// `(Δa, Δb)` so `x_max` may exceed `Δa`.
pub fn reference_walk<T: LatticeInt>(slope: &Slope<T>, x_max: usize) -> Vec<T> {
    let mut ys = Vec::with_capacity(x_max + 1);
    let mut y = T::zero();
    let mut td = initial_td(slope);
    ys.push(y);
    for _ in 0..x_max {
        let (mv, next) = step(td, slope);
        y = y + mv.rise();
        td = next;
        ys.push(y);
    }
    ys
}

/// Like [`reference_walk`] for any convention and tie rule.
pub fn reference_walk_with<T: LatticeInt>(
    slope: &Slope<T>,
    x_max: usize,
    convention: Convention,
    tie: TieRule,
) -> Vec<T> {
    let walk = Walk {
        point: LatticePoint::origin(),
        td: DecisionVar {
            value: convention.offset(slope),
            convention,
        },
        slope: *slope,
        tie,
    };
    walk.take(x_max + 1).map(|(p, _)| p.y).collect()
}

/// Every lattice point strictly left of `target` from which `target` can be
/// reached with `M1`/`M2` moves:
/// `{(k, l) : 0 <= k < i, max(0, k - (i - j)) <= l <= min(k, j)}`.
///
/// At the segment end `(Δa, Δb)` the lower bound reads `k - Δa + Δb`.
pub fn backward_reachable<T: LatticeInt>(target: &LatticePoint<T>) -> Vec<LatticePoint<T>> {
    let mut out = Vec::new();
    let gap = target.x - target.y;
    let mut k = T::zero();
    while k < target.x {
        let lo = (k - gap).max(T::zero());
        let hi = k.min(target.y);
        let mut l = lo;
        while l <= hi {
            out.push(LatticePoint { x: k, y: l });
            l = l + T::one();
        }
        k = k + T::one();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slope(a: i64, b: i64) -> Slope<i64> {
        Slope::new(a, b).unwrap()
    }

    #[test]
    fn slope_rejects_out_of_range() {
        assert!(Slope::new(6i64, 0).is_err());
        assert!(Slope::new(6i64, 6).is_err());
        assert!(Slope::new(6i64, 7).is_err());
        assert!(Slope::new(1i64 << 32, 1).is_err());
        assert!(Slope::new(u32::MAX as i64, 1).is_ok());
    }

    #[test]
    fn point_rejects_above_diagonal() {
        assert!(LatticePoint::new(3i64, 4).is_err());
        assert!(LatticePoint::new(3i64, -1).is_err());
        assert!(LatticePoint::new(3i64, 3).is_ok());
    }

    #[test]
    fn initial_td_examples() {
        assert_eq!(initial_td(&slope(6, 4)).value, 2);
        assert_eq!(initial_td(&slope(2, 1)).value, 0);
        assert_eq!(initial_td(&slope(1_000_000, 999_900)).value, 999_800);
    }

    #[test]
    fn step_examples() {
        let s = slope(6, 4);
        let td = |value| DecisionVar {
            value,
            convention: Convention::TdConsistent,
        };
        assert_eq!(step(td(2), &s), (Movement::M2, td(-2)));
        assert_eq!(step(td(-2), &s), (Movement::M1, td(6)));
        assert_eq!(step(td(0), &slope(2, 1)), (Movement::M2, td(-2)));
        assert_eq!(
            step_with(td(0), &slope(2, 1), TieRule::Horizontal),
            (Movement::M1, td(2))
        );
    }

    #[test]
    fn otd_examples() {
        let s = slope(6, 4);
        let p = |x, y| LatticePoint::new(x, y).unwrap();
        assert_eq!(otd(&p(3, 2), &s, Convention::TdConsistent).unwrap().value, 2);
        assert_eq!(otd(&p(0, 0), &s, Convention::ClosedForm).unwrap().value, 0);
        assert_eq!(otd(&p(0, 0), &s, Convention::TdConsistent).unwrap().value, 2);
        assert_eq!(otd(&p(4, 3), &s, Convention::TdConsistent).unwrap().value, -2);
    }

    #[test]
    fn otd_reports_overflow() {
        let s = slope(u32::MAX as i64, 3);
        let p = LatticePoint::new(i64::MAX / 2, 0).unwrap();
        assert!(matches!(
            otd(&p, &s, Convention::TdConsistent),
            Err(Error::Overflow { .. })
        ));
        // i128 has room for the same point.
        let wide = Slope::new(u32::MAX as i128, 3).unwrap();
        let p = LatticePoint::new((i64::MAX / 2) as i128, 0).unwrap();
        assert!(otd(&p, &wide, Convention::TdConsistent).is_ok());
    }

    #[test]
    fn reference_walk_examples() {
        assert_eq!(reference_walk(&slope(6, 4), 6), vec![0, 1, 1, 2, 3, 3, 4]);
        assert_eq!(reference_walk(&slope(2, 1), 4), vec![0, 1, 1, 2, 2]);
        assert_eq!(reference_walk(&slope(9, 5), 0), vec![0]);
    }

    #[test]
    fn generic_walk_matches_recursion() {
        let s = slope(6, 4);
        assert_eq!(
            reference_walk_with(&s, 12, Convention::TdConsistent, TieRule::Diagonal),
            reference_walk(&s, 12)
        );
        // The bare closed form tracks floor((x-1)·Δb/Δa) + 1.
        assert_eq!(
            reference_walk_with(&s, 6, Convention::ClosedForm, TieRule::Diagonal),
            vec![0, 1, 1, 2, 3, 3, 4]
        );
        let s = slope(7, 3);
        let bare = reference_walk_with(&s, 20, Convention::ClosedForm, TieRule::Diagonal);
        for (x, y) in bare.iter().enumerate().skip(1) {
            assert_eq!(*y, ((x as i64 - 1) * 3).div_euclid(7) + 1);
        }
    }

    #[test]
    fn is_on_path_agrees_with_walks() {
        for a in 2..=20i64 {
            for b in 1..a {
                let s = slope(a, b);
                for convention in [Convention::TdConsistent, Convention::ClosedForm] {
                    for tie in [TieRule::Diagonal, TieRule::Horizontal] {
                        let ys = reference_walk_with(&s, 3 * a as usize, convention, tie);
                        for (x, &y) in ys.iter().enumerate() {
                            for cand in 0..=(x as i64) {
                                let p = LatticePoint::new(x as i64, cand).unwrap();
                                assert_eq!(
                                    is_on_path(&p, &s, convention, tie).unwrap(),
                                    cand == y,
                                    "a={a} b={b} x={x} y={cand} {convention:?} {tie:?}"
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn backward_reachable_at_destination_matches_closed_form() {
        // Six columns, four rows: 0 <= k < 6, max(0, k-2) <= l <= min(k, 4).
        let target = LatticePoint::new(6i64, 4).unwrap();
        let set = backward_reachable(&target);
        let mut expected = Vec::new();
        for k in 0..6i64 {
            for l in (k - 2).max(0)..=k.min(4) {
                expected.push(LatticePoint { x: k, y: l });
            }
        }
        assert_eq!(set, expected);
        assert!(set.contains(&LatticePoint { x: 2, y: 0 }));
        assert!(set.contains(&LatticePoint { x: 4, y: 4 }));
        assert!(!set.contains(&LatticePoint { x: 3, y: 0 }));
    }

    #[test]
    fn walk_iterator_yields_start_first() {
        let s = slope(6, 4);
        let start = LatticePoint::new(4, 3).unwrap();
        let mut walk = walk_from(start, &s, Convention::TdConsistent, TieRule::Diagonal).unwrap();
        let (p, td) = walk.next().unwrap();
        assert_eq!(p, start);
        assert_eq!(td.value, -2);
        assert_eq!(walk.point(), LatticePoint { x: 5, y: 3 });
    }
}

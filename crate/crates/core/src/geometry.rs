//! Small shared value types: spatial dimension, points, multi-indices, boxes.
//!
//! Points and multi-indices are always two-component; in 1D the second
//! component is ignored (and kept at zero by the constructors).

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Point = [f64; 2];
pub type MultiIndex = [usize; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dim {
    #[serde(rename = "1d")]
    One,
    #[serde(rename = "2d")]
    Two,
}

impl Dim {
    pub fn count(self) -> usize {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }

    /// Unit multi-index along `axis`.
    pub fn unit(self, axis: usize) -> MultiIndex {
        let mut e = [0, 0];
        e[axis] = 1;
        e
    }

    /// All multi-indices with total order ≤ `order`, graded-lexicographic.
    pub fn multi_indices(self, order: usize) -> Vec<MultiIndex> {
        match self {
            Dim::One => (0..=order).map(|k| [k, 0]).collect(),
            Dim::Two => (0..=order)
                .flat_map(|k| (0..=k).map(move |j| [k - j, j]))
                .collect(),
        }
    }
}

pub fn add_index(a: MultiIndex, b: MultiIndex) -> MultiIndex {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn order(a: MultiIndex) -> usize {
    a[0] + a[1]
}

/// Axis-aligned box; an interval `[lo[0], hi[0]]` in 1D.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub lo: Point,
    pub hi: Point,
}

impl Rect {
    pub fn interval(a: f64, b: f64) -> Rect {
        Rect {
            lo: [a, 0.0],
            hi: [b, 0.0],
        }
    }

    pub fn new(lo: Point, hi: Point) -> Rect {
        Rect { lo, hi }
    }

    /// `[-h, h]^d` shifted to `center`.
    pub fn centered(dim: Dim, center: Point, half_width: f64) -> Rect {
        match dim {
            Dim::One => Rect::interval(center[0] - half_width, center[0] + half_width),
            Dim::Two => Rect::new(
                [center[0] - half_width, center[1] - half_width],
                [center[0] + half_width, center[1] + half_width],
            ),
        }
    }

    pub fn validate(&self, dim: Dim) -> Result<()> {
        let ok = (0..dim.count()).all(|i| {
            self.lo[i].is_finite() && self.hi[i].is_finite() && self.lo[i] < self.hi[i]
        });
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("degenerate box {:?}", self)))
        }
    }

    pub fn measure(&self, dim: Dim) -> f64 {
        (0..dim.count()).map(|i| self.hi[i] - self.lo[i]).product()
    }

    pub fn contains(&self, dim: Dim, p: Point) -> bool {
        (0..dim.count()).all(|i| self.lo[i] <= p[i] && p[i] <= self.hi[i])
    }

    pub fn contains_rect(&self, dim: Dim, other: &Rect) -> bool {
        (0..dim.count()).all(|i| self.lo[i] <= other.lo[i] && other.hi[i] <= self.hi[i])
    }

    pub fn dilate(&self, dim: Dim, by: f64) -> Rect {
        let mut r = *self;
        for i in 0..dim.count() {
            r.lo[i] -= by;
            r.hi[i] += by;
        }
        r
    }

    pub fn translate(&self, dim: Dim, shift: Point) -> Rect {
        let mut r = *self;
        for i in 0..dim.count() {
            r.lo[i] += shift[i];
            r.hi[i] += shift[i];
        }
        r
    }

    /// Intersection, or `None` when the overlap has zero measure.
    pub fn intersect(&self, dim: Dim, other: &Rect) -> Option<Rect> {
        let mut r = *self;
        for i in 0..dim.count() {
            r.lo[i] = self.lo[i].max(other.lo[i]);
            r.hi[i] = self.hi[i].min(other.hi[i]);
            if r.lo[i] >= r.hi[i] {
                return None;
            }
        }
        Some(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_index_counts() {
        assert_eq!(Dim::One.multi_indices(3).len(), 4);
        assert_eq!(Dim::Two.multi_indices(2).len(), 6);
        assert_eq!(
            Dim::Two.multi_indices(2),
            vec![[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]
        );
    }

    #[test]
    fn rect_ops() {
        let r = Rect::centered(Dim::Two, [0.0, 0.0], 1.0);
        assert_eq!(r.measure(Dim::Two), 4.0);
        let d = r.dilate(Dim::Two, 1.0);
        assert!(d.contains_rect(Dim::Two, &r));
        let half = d.intersect(Dim::Two, &Rect::new([0.0, -10.0], [10.0, 10.0])).unwrap();
        assert_eq!(half.lo, [0.0, -2.0]);
        assert!(Rect::interval(1.0, 1.0).validate(Dim::One).is_err());
    }
}

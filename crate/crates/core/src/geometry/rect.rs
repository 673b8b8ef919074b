use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Axis-aligned image rectangle in 0-based pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Rect2<T> {
    pub left: T,
    pub top: T,
    pub right: T,
    pub bottom: T,
}

impl<T: Scalar> Rect2<T> {
    /// `None` unless `left < right` and `top < bottom` with finite coordinates.
    pub fn new(left: T, top: T, right: T, bottom: T) -> Option<Self> {
        let r = Self { left, top, right, bottom };
        r.is_valid().then_some(r)
    }

    pub fn is_valid(&self) -> bool {
        [self.left, self.top, self.right, self.bottom].iter().all(|v| v.is_finite())
            && self.left < self.right
            && self.top < self.bottom
    }

    pub fn width(&self) -> T {
        self.right - self.left
    }

    pub fn height(&self) -> T {
        self.bottom - self.top
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    /// Overlap of two rects, `None` when it has no area.
    pub fn intersection(&self, o: &Self) -> Option<Self> {
        Self::new(
            self.left.max(o.left),
            self.top.max(o.top),
            self.right.min(o.right),
            self.bottom.min(o.bottom),
        )
    }
}

/// Intersection over union; 0 for disjoint or touching rects.
pub fn rect_iou<T: Scalar>(a: &Rect2<T>, b: &Rect2<T>) -> T {
    let Some(inter) = a.intersection(b) else {
        return T::zero();
    };
    let i = inter.area();
    let union = a.area() + b.area() - i;
    if union <= T::zero() {
        return T::zero();
    }
    (i / union).min(T::one())
}

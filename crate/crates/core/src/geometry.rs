//! Pixel rectangles and the 0..=999 coordinate binning.

use serde::{Deserialize, Serialize};

use crate::model::{BBox, MAX_BIN};

const BINS: f64 = 1000.0;

/// Rectangle in pixel space, top-left origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelRect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl PixelRect {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self { x_min, y_min, x_max, y_max }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)
    }

    pub fn union(&self, other: &PixelRect) -> PixelRect {
        PixelRect {
            x_min: self.x_min.min(other.x_min),
            y_min: self.y_min.min(other.y_min),
            x_max: self.x_max.max(other.x_max),
            y_max: self.y_max.max(other.y_max),
        }
    }

    pub fn iou(&self, other: &PixelRect) -> f64 {
        let w = (self.x_max.min(other.x_max) - self.x_min.max(other.x_min)).max(0.0);
        let h = (self.y_max.min(other.y_max) - self.y_min.max(other.y_min)).max(0.0);
        let inter = w * h;
        let union = self.width() * self.height() + other.width() * other.height() - inter;
        if union > 0.0 {
            inter / union
        } else {
            0.0
        }
    }
}

/// Image extent in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageDims {
    pub width: u32,
    pub height: u32,
}

impl ImageDims {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("image dimensions must be positive")]
    EmptyImage,
    #[error("rectangle ({x_min}, {y_min}, {x_max}, {y_max}) is inverted, degenerate, or outside the image")]
    InvalidGeometry { x_min: f64, y_min: f64, x_max: f64, y_max: f64 },
}

fn to_bin(c: f64, extent: f64) -> u16 {
    let b = libm::floor(c * BINS / extent);
    if b <= 0.0 {
        0
    } else if b >= f64::from(MAX_BIN) {
        MAX_BIN
    } else {
        b as u16
    }
}

/// Widens a collapsed interval by one bin, toward the max side when there is room.
fn widen(lo: u16, hi: u16) -> (u16, u16) {
    if lo < hi {
        (lo, hi)
    } else if hi < MAX_BIN {
        (lo, hi + 1)
    } else {
        (lo - 1, hi)
    }
}

/// Quantizes a pixel rectangle into coordinate bins with
/// `floor(c / extent * 1000)`, clamped to `0..=999`.
pub fn pixel_to_bins(rect: &PixelRect, dims: ImageDims) -> Result<BBox, GeometryError> {
    if dims.width == 0 || dims.height == 0 {
        return Err(GeometryError::EmptyImage);
    }
    let (w, h) = (f64::from(dims.width), f64::from(dims.height));
    let ok = rect.x_min >= 0.0
        && rect.y_min >= 0.0
        && rect.x_min < rect.x_max
        && rect.y_min < rect.y_max
        && rect.x_max <= w
        && rect.y_max <= h;
    if !ok {
        return Err(GeometryError::InvalidGeometry {
            x_min: rect.x_min,
            y_min: rect.y_min,
            x_max: rect.x_max,
            y_max: rect.y_max,
        });
    }
    let (x0, x1) = widen(to_bin(rect.x_min, w), to_bin(rect.x_max, w));
    let (y0, y1) = widen(to_bin(rect.y_min, h), to_bin(rect.y_max, h));
    Ok(BBox::new(x0, y0, x1, y1).expect("widened bins are ordered and in range"))
}

/// Maps bins back to pixels at bin centers: `(bin + 0.5) / 1000 * extent`.
pub fn bins_to_pixels(bbox: &BBox, dims: ImageDims) -> PixelRect {
    let (w, h) = (f64::from(dims.width), f64::from(dims.height));
    let c = |bin: u16, extent: f64| (f64::from(bin) + 0.5) * extent / BINS;
    PixelRect {
        x_min: c(bbox.x_min(), w),
        y_min: c(bbox.y_min(), h),
        x_max: c(bbox.x_max(), w),
        y_max: c(bbox.y_max(), h),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bins(x0: u16, y0: u16, x1: u16, y1: u16) -> BBox {
        BBox::new(x0, y0, x1, y1).unwrap()
    }

    #[test]
    fn full_image_maps_to_full_range() {
        let d = ImageDims::new(640, 480);
        let b = pixel_to_bins(&PixelRect::new(0.0, 0.0, 640.0, 480.0), d).unwrap();
        assert_eq!(b, bins(0, 0, 999, 999));
    }

    #[test]
    fn floor_arithmetic() {
        let d = ImageDims::new(2000, 1000);
        let b = pixel_to_bins(&PixelRect::new(500.0, 250.0, 1000.0, 500.0), d).unwrap();
        assert_eq!(b, bins(250, 250, 500, 500));
    }

    #[test]
    fn brute_force_formula_agreement() {
        // exhaustive over integer pixel coordinates of a small odd-sized image
        let d = ImageDims::new(37, 23);
        for x in 0..=37u32 {
            let expect = ((u64::from(x) * 1000) / 37).min(999) as u16;
            assert_eq!(to_bin(f64::from(x), 37.0), expect, "x = {x}");
        }
        let b = pixel_to_bins(&PixelRect::new(3.0, 4.0, 20.0, 23.0), d).unwrap();
        assert_eq!(b, bins(81, 173, 540, 999));
    }

    #[test]
    fn zero_width_rejected() {
        let d = ImageDims::new(100, 100);
        let err = pixel_to_bins(&PixelRect::new(10.0, 10.0, 10.0, 20.0), d).unwrap_err();
        assert!(matches!(err, GeometryError::InvalidGeometry { .. }));
        assert!(pixel_to_bins(&PixelRect::new(-1.0, 0.0, 10.0, 20.0), d).is_err());
        assert!(pixel_to_bins(&PixelRect::new(0.0, 0.0, 101.0, 20.0), d).is_err());
        assert!(pixel_to_bins(&PixelRect::new(0.0, 0.0, 1.0, 1.0), ImageDims::new(0, 5)).is_err());
    }

    #[test]
    fn collapsed_interval_is_widened() {
        // 10000 px wide: pixels 1.0..1.5 both land in bin 0
        let d = ImageDims::new(10000, 100);
        let b = pixel_to_bins(&PixelRect::new(1.0, 0.0, 1.5, 50.0), d).unwrap();
        assert_eq!((b.x_min(), b.x_max()), (0, 1));
        let b = pixel_to_bins(&PixelRect::new(9999.5, 0.0, 10000.0, 50.0), d).unwrap();
        assert_eq!((b.x_min(), b.x_max()), (998, 999));
    }

    #[test]
    fn bin_center_inverse() {
        let r = bins_to_pixels(&bins(0, 0, 999, 999), ImageDims::new(1000, 1000));
        assert_eq!(r, PixelRect::new(0.5, 0.5, 999.5, 999.5));
        let r = bins_to_pixels(&bins(250, 250, 500, 500), ImageDims::new(2000, 1000));
        assert_eq!(r, PixelRect::new(501.0, 250.5, 1001.0, 500.5));
    }

    fn any_box() -> impl Strategy<Value = BBox> {
        (0u16..999, 0u16..999, 1u16..=999, 1u16..=999).prop_map(|(a, b, w, h)| {
            let x1 = (a + w).min(999).max(a + 1);
            let y1 = (b + h).min(999).max(b + 1);
            bins(a, b, x1, y1)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn round_trip_through_pixels(b in any_box(), w in 1u32..5000, h in 1u32..5000) {
            let d = ImageDims::new(w, h);
            let back = pixel_to_bins(&bins_to_pixels(&b, d), d).unwrap();
            prop_assert_eq!(back, b);
        }
    }

    proptest! {
        #[test]
        fn binning_is_monotone(
            w in 10u32..3000, h in 10u32..3000,
            fx in 0.0f64..0.4, fy in 0.0f64..0.4, fw in 0.1f64..0.5, fh in 0.1f64..0.5,
            shrink in 0.0f64..0.45,
        ) {
            let (wf, hf) = (f64::from(w), f64::from(h));
            let outer = PixelRect::new(fx * wf, fy * hf, (fx + fw) * wf, (fy + fh) * hf);
            let dx = outer.width() * shrink;
            let dy = outer.height() * shrink;
            let inner = PixelRect::new(outer.x_min + dx, outer.y_min + dy, outer.x_max - dx, outer.y_max - dy);
            let d = ImageDims::new(w, h);
            let a = pixel_to_bins(&outer, d).unwrap();
            let b = pixel_to_bins(&inner, d).unwrap();
            // containment up to the one-bin widening of collapsed intervals
            prop_assert!(a.x_min() <= b.x_min() && a.y_min() <= b.y_min());
            prop_assert!(b.x_max() <= a.x_max() + 1 && b.y_max() <= a.y_max() + 1);
            if inner.width() * 1000.0 / wf >= 1.0 {
                prop_assert!(b.x_max() <= a.x_max());
            }
            if inner.height() * 1000.0 / hf >= 1.0 {
                prop_assert!(b.y_max() <= a.y_max());
            }
        }
    }
}

#pragma once

#include <array>
#include <cstdint>

namespace boxfix {

/// Index of a box boundary. The numeric order matches BBox::coords().
enum class Boundary : int { kLeft = 0, kTop = 1, kRight = 2, kBottom = 3 };

inline constexpr std::array<Boundary, 4> kAllBoundaries = {
    Boundary::kLeft, Boundary::kTop, Boundary::kRight, Boundary::kBottom};

const char* boundary_name(Boundary b);

/// True for left/right, whose errors are normalized by the object width.
constexpr bool is_horizontal(Boundary b) {
  return b == Boundary::kLeft || b == Boundary::kRight;
}

struct XYWH {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const XYWH&, const XYWH&) = default;
};

/// Axis-aligned box in absolute image coordinates, corner form.
///
/// The checked constructor rejects inverted or non-finite boxes; `sanitized`
/// is the clamping variant used wherever noise or averaging may invert a box.
class BBox {
 public:
  constexpr BBox() = default;
  BBox(double left, double top, double right, double bottom);

  /// Builds a box, repairing inversions: when left > right (or top > bottom)
  /// the pair is replaced by their midpoint -/+ 0.5 px. `clamped` is set when a
  /// repair happened.
  static BBox sanitized(double left, double top, double right, double bottom,
                        bool* clamped = nullptr);
  static BBox sanitized(const std::array<double, 4>& coords, bool* clamped = nullptr) {
    return sanitized(coords[0], coords[1], coords[2], coords[3], clamped);
  }
  static BBox from_coords(const std::array<double, 4>& coords) {
    return BBox(coords[0], coords[1], coords[2], coords[3]);
  }

  double left() const { return l_; }
  double top() const { return t_; }
  double right() const { return r_; }
  double bottom() const { return b_; }

  double width() const { return r_ - l_; }
  double height() const { return b_ - t_; }
  double area() const { return width() * height(); }

  double coord(Boundary b) const { return coords()[static_cast<int>(b)]; }
  /// (left, top, right, bottom)
  std::array<double, 4> coords() const { return {l_, t_, r_, b_}; }

  /// Extent used to normalize errors on boundary `b` (width or height).
  double extent_for(Boundary b) const { return is_horizontal(b) ? width() : height(); }

  BBox translated(double dx, double dy) const;
  bool contains(const BBox& other, double tol = 0.0) const;

  friend bool operator==(const BBox&, const BBox&) = default;

 private:
  double l_ = 0.0;
  double t_ = 0.0;
  double r_ = 0.0;
  double b_ = 0.0;
};

/// Intersection over union; 0 when the union has zero area.
double iou(const BBox& a, const BBox& b);

double intersection_area(const BBox& a, const BBox& b);

/// COCO [x, y, w, h] to corners. Negative extents are rejected.
BBox from_xywh(double x, double y, double w, double h);
inline BBox from_xywh(const XYWH& v) { return from_xywh(v.x, v.y, v.w, v.h); }
XYWH to_xywh(const BBox& b);

}  // namespace boxfix

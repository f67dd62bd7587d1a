#include "boxfix/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "boxfix/error.hpp"

namespace boxfix {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kUsage: return "usage";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kReference: return "reference";
    case ErrorCode::kRange: return "range";
    case ErrorCode::kNumeric: return "numeric";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

const char* boundary_name(Boundary b) {
  switch (b) {
    case Boundary::kLeft: return "left";
    case Boundary::kTop: return "top";
    case Boundary::kRight: return "right";
    case Boundary::kBottom: return "bottom";
  }
  return "?";
}

BBox::BBox(double left, double top, double right, double bottom)
    : l_(left), t_(top), r_(right), b_(bottom) {
  if (!std::isfinite(left) || !std::isfinite(top) || !std::isfinite(right) ||
      !std::isfinite(bottom)) {
    throw Error(ErrorCode::kInvalidArgument, "box coordinates must be finite");
  }
  if (left > right || top > bottom) {
    std::ostringstream os;
    os << "inverted box (" << left << ", " << top << ", " << right << ", " << bottom << ")";
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
}

BBox BBox::sanitized(double left, double top, double right, double bottom, bool* clamped) {
  bool fixed = false;
  if (left > right) {
    const double mid = 0.5 * (left + right);
    left = mid - 0.5;
    right = mid + 0.5;
    fixed = true;
  }
  if (top > bottom) {
    const double mid = 0.5 * (top + bottom);
    top = mid - 0.5;
    bottom = mid + 0.5;
    fixed = true;
  }
  if (clamped != nullptr) *clamped = fixed;
  return BBox(left, top, right, bottom);
}

BBox BBox::translated(double dx, double dy) const {
  return BBox(l_ + dx, t_ + dy, r_ + dx, b_ + dy);
}

bool BBox::contains(const BBox& o, double tol) const {
  return l_ <= o.l_ + tol && t_ <= o.t_ + tol && r_ >= o.r_ - tol && b_ >= o.b_ - tol;
}

double intersection_area(const BBox& a, const BBox& b) {
  const double w = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
  const double h = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const BBox& a, const BBox& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

BBox from_xywh(double x, double y, double w, double h) {
  if (!(w >= 0.0) || !(h >= 0.0)) {
    std::ostringstream os;
    os << "negative box extent (w=" << w << ", h=" << h << ")";
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
  return BBox(x, y, x + w, y + h);
}

XYWH to_xywh(const BBox& b) { return {b.left(), b.top(), b.width(), b.height()}; }

}  // namespace boxfix

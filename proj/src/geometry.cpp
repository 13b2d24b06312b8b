#include "beol/geometry.hpp"

#include <algorithm>

namespace beol {

double signed_area(const Polygon& p) {
  double a = 0;
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& u = p[i];
    const Vec2& v = p[(i + 1) % n];
    a += u.x * v.y - v.x * u.y;
  }
  return 0.5 * a;
}

double polygon_area(const Polygon& p) { return std::abs(signed_area(p)); }

void ensure_ccw(Polygon& p) {
  if (signed_area(p) < 0) std::reverse(p.begin(), p.end());
}

namespace {

// Proper or improper intersection of open segments, excluding shared endpoints
// between adjacent edges (the caller filters adjacency).
double cross(Vec2 o, Vec2 a, Vec2 b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  double d1 = cross(c, d, a);
  double d2 = cross(c, d, b);
  double d3 = cross(a, b, c);
  double d4 = cross(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  if (d1 == 0 && on_segment(c, d, a)) return true;
  if (d2 == 0 && on_segment(c, d, b)) return true;
  if (d3 == 0 && on_segment(a, b, c)) return true;
  if (d4 == 0 && on_segment(a, b, d)) return true;
  return false;
}

}  // namespace

bool polygon_is_simple(const Polygon& p) {
  const std::size_t n = p.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // skip edges sharing a vertex
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_intersect(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n]))
        return false;
    }
  }
  return true;
}

bool point_in_polygon(const Polygon& poly, Vec2 p) {
  // Even-odd crossing rule, half-open in y.
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 a = poly[i];
    Vec2 b = poly[(i + 1) % n];
    if ((a.y <= p.y) != (b.y <= p.y)) {
      double xc = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (xc > p.x) inside = !inside;
    }
  }
  return inside;
}

namespace {

// One Sutherland-Hodgman pass against the half-plane side(v) >= 0.
template <typename Side, typename Cut>
Polygon clip_half_plane(const Polygon& in, Side side, Cut cut) {
  Polygon out;
  const std::size_t n = in.size();
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 cur = in[i];
    Vec2 nxt = in[(i + 1) % n];
    bool cin = side(cur) >= 0;
    bool nin = side(nxt) >= 0;
    if (cin) out.push_back(cur);
    if (cin != nin) out.push_back(cut(cur, nxt));
  }
  return out;
}

void drop_duplicates(Polygon& p) {
  Polygon out;
  for (const Vec2& v : p) {
    if (!out.empty() && out.back().x == v.x && out.back().y == v.y) continue;
    out.push_back(v);
  }
  while (out.size() > 1 && out.front().x == out.back().x &&
         out.front().y == out.back().y)
    out.pop_back();
  p = std::move(out);
}

}  // namespace

Polygon clip_polygon(const Polygon& poly, const Window& w) {
  Polygon p = poly;
  p = clip_half_plane(
      p, [&](Vec2 v) { return v.x - w.x_min; },
      [&](Vec2 a, Vec2 b) {
        double t = (w.x_min - a.x) / (b.x - a.x);
        return Vec2{w.x_min, a.y + t * (b.y - a.y)};
      });
  if (p.empty()) return {};
  p = clip_half_plane(
      p, [&](Vec2 v) { return w.x_max - v.x; },
      [&](Vec2 a, Vec2 b) {
        double t = (w.x_max - a.x) / (b.x - a.x);
        return Vec2{w.x_max, a.y + t * (b.y - a.y)};
      });
  if (p.empty()) return {};
  p = clip_half_plane(
      p, [&](Vec2 v) { return v.y - w.y_min; },
      [&](Vec2 a, Vec2 b) {
        double t = (w.y_min - a.y) / (b.y - a.y);
        return Vec2{a.x + t * (b.x - a.x), w.y_min};
      });
  if (p.empty()) return {};
  p = clip_half_plane(
      p, [&](Vec2 v) { return w.y_max - v.y; },
      [&](Vec2 a, Vec2 b) {
        double t = (w.y_max - a.y) / (b.y - a.y);
        return Vec2{a.x + t * (b.x - a.x), w.y_max};
      });
  drop_duplicates(p);
  if (p.size() < 3 || polygon_area(p) == 0.0) return {};
  return p;
}

PolygonSet clip(const PolygonSet& polys, const Window& w) {
  PolygonSet out;
  out.layer_key = polys.layer_key;
  for (const Polygon& p : polys.polygons) {
    Polygon c = clip_polygon(p, w);
    if (!c.empty()) {
      ensure_ccw(c);
      out.polygons.push_back(std::move(c));
    }
  }
  return out;
}

double total_area(const PolygonSet& polys) {
  double a = 0;
  for (const Polygon& p : polys.polygons) a += polygon_area(p);
  return a;
}

}  // namespace beol

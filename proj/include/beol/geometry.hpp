#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <vector>

namespace beol {

struct Vec2 {
  double x = 0, y = 0;
  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
};

struct Vec3 {
  double x = 0, y = 0, z = 0;
  Vec3 operator+(Vec3 o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(Vec3 o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(Vec3 o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

struct Mat3 {
  // row-major
  std::array<double, 9> a{};
  double& operator()(int r, int c) { return a[3 * r + c]; }
  double operator()(int r, int c) const { return a[3 * r + c]; }
  static Mat3 identity(double s = 1.0) {
    Mat3 m;
    m(0, 0) = m(1, 1) = m(2, 2) = s;
    return m;
  }
  Mat3 operator+(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 9; ++i) r.a[i] = a[i] + o.a[i];
    return r;
  }
  Mat3 operator-(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 9; ++i) r.a[i] = a[i] - o.a[i];
    return r;
  }
  Mat3 operator*(double s) const {
    Mat3 r;
    for (int i = 0; i < 9; ++i) r.a[i] = a[i] * s;
    return r;
  }
  Vec3 operator*(Vec3 v) const {
    return {a[0] * v.x + a[1] * v.y + a[2] * v.z,
            a[3] * v.x + a[4] * v.y + a[5] * v.z,
            a[6] * v.x + a[7] * v.y + a[8] * v.z};
  }
  Mat3 transpose() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
    return r;
  }
  Mat3 sym() const { return (*this + transpose()) * 0.5; }
  double frobenius() const {
    double s = 0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
  }
};

// Simple polygon, vertices without a repeated closing point.
using Polygon = std::vector<Vec2>;

struct LayerKey {
  int layer = 0;
  int datatype = 0;
  auto operator<=>(const LayerKey&) const = default;
};

struct PolygonSet {
  LayerKey layer_key;
  std::vector<Polygon> polygons;  // vertices in meters, CCW
};

struct Window {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;
  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  bool contains(Vec2 p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
};

double signed_area(const Polygon& p);
double polygon_area(const Polygon& p);
void ensure_ccw(Polygon& p);
bool polygon_is_simple(const Polygon& p);
bool point_in_polygon(const Polygon& poly, Vec2 p);

// Clip one polygon against an axis-aligned rectangle (Sutherland-Hodgman).
Polygon clip_polygon(const Polygon& poly, const Window& w);
PolygonSet clip(const PolygonSet& polys, const Window& w);

double total_area(const PolygonSet& polys);

}  // namespace beol

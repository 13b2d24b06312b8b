#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "beol/geometry.hpp"

namespace beol {

struct IVec2 {
  std::int32_t x = 0, y = 0;
  bool operator==(const IVec2&) const = default;
};

// Filled polygon in database units, closing vertex removed.
struct Boundary {
  int layer = 0;
  int datatype = 0;
  std::vector<IVec2> vertices;
  bool operator==(const Boundary&) const = default;
};

// Single cell placement. Rotation in degrees CCW, mirror about the x axis
// applied before rotation (GDSII order).
struct Sref {
  std::string cell;
  IVec2 origin;
  double rotation = 0;
  bool mirror_x = false;
  double mag = 1;  // kept for diagnostics; flatten requires mag == 1
  bool operator==(const Sref&) const = default;
};

// Array placement. Pitches are in database units in the parent frame.
struct Aref {
  std::string cell;
  IVec2 origin;
  double rotation = 0;
  bool mirror_x = false;
  double mag = 1;
  int cols = 1, rows = 1;
  Vec2 col_pitch, row_pitch;
  bool operator==(const Aref& o) const {
    return cell == o.cell && origin == o.origin && rotation == o.rotation &&
           mirror_x == o.mirror_x && mag == o.mag && cols == o.cols &&
           rows == o.rows &&
           col_pitch.x == o.col_pitch.x && col_pitch.y == o.col_pitch.y &&
           row_pitch.x == o.row_pitch.x && row_pitch.y == o.row_pitch.y;
  }
};

struct Cell {
  std::string name;
  std::vector<Boundary> boundaries;
  std::vector<Sref> srefs;
  std::vector<Aref> arefs;
};

struct LayoutDatabase {
  std::string library_name;
  double unit_user = 1e-6;  // meters per user unit
  double unit_db = 1e-9;    // meters per database unit
  std::vector<Cell> cells;
  int skipped_records = 0;  // TEXT/NODE/property records dropped with warning

  int cell_index(const std::string& name) const;  // -1 if absent
  // Cells never referenced by another cell, in definition order.
  std::vector<std::string> top_cells() const;
};

// GDSII 8-byte excess-64 base-16 real codec.
double gds_real8_decode(std::uint64_t bits);
std::uint64_t gds_real8_encode(double value);

LayoutDatabase parse_gdsii(const std::vector<std::uint8_t>& bytes);
LayoutDatabase parse_gdsii_file(const std::string& path);
std::vector<std::uint8_t> write_gdsii(const LayoutDatabase& db);
void write_gdsii_file(const LayoutDatabase& db, const std::string& path);

// Recursively flattens one layer of a cell into polygons in meters, CCW.
PolygonSet flatten_layer(const LayoutDatabase& db, const std::string& top_cell,
                         LayerKey key);

// All (layer, datatype) pairs present in the database.
std::vector<LayerKey> layer_keys(const LayoutDatabase& db);

}  // namespace beol

#include "beol/gdsii.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>

#include "beol/errors.hpp"

namespace beol {

namespace rec {
constexpr std::uint8_t HEADER = 0x00, BGNLIB = 0x01, LIBNAME = 0x02,
                       UNITS = 0x03, ENDLIB = 0x04, BGNSTR = 0x05,
                       STRNAME = 0x06, ENDSTR = 0x07, BOUNDARY = 0x08,
                       PATH = 0x09, SREF = 0x0A, AREF = 0x0B, TEXT = 0x0C,
                       LAYER = 0x0D, DATATYPE = 0x0E, WIDTH = 0x0F, XY = 0x10,
                       ENDEL = 0x11, SNAME = 0x12, COLROW = 0x13, NODE = 0x15,
                       TEXTTYPE = 0x16, STRING = 0x19, STRANS = 0x1A,
                       MAG = 0x1B, ANGLE = 0x1C, PATHTYPE = 0x21,
                       NODETYPE = 0x2A, PROPATTR = 0x2B, PROPVALUE = 0x2C,
                       BOX = 0x2D, BOXTYPE = 0x2E;
}

int LayoutDatabase::cell_index(const std::string& name) const {
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (cells[i].name == name) return static_cast<int>(i);
  return -1;
}

std::vector<std::string> LayoutDatabase::top_cells() const {
  std::set<std::string> referenced;
  for (const Cell& c : cells) {
    for (const Sref& s : c.srefs) referenced.insert(s.cell);
    for (const Aref& a : c.arefs) referenced.insert(a.cell);
  }
  std::vector<std::string> tops;
  for (const Cell& c : cells)
    if (!referenced.count(c.name)) tops.push_back(c.name);
  return tops;
}

double gds_real8_decode(std::uint64_t bits) {
  const bool neg = bits >> 63;
  const int exp = static_cast<int>((bits >> 56) & 0x7F) - 64;
  const std::uint64_t mant = bits & 0x00FFFFFFFFFFFFFFull;
  double v = std::ldexp(static_cast<double>(mant), 4 * exp - 56);
  return neg ? -v : v;
}

std::uint64_t gds_real8_encode(double value) {
  if (value == 0.0) return 0;
  const bool neg = value < 0;
  double a = std::abs(value);
  int e2 = 0;
  std::frexp(a, &e2);  // a = m * 2^e2, m in [0.5, 1)
  // smallest base-16 exponent k with a / 16^k < 1
  int k = (e2 >= 0) ? (e2 + 3) / 4 : -((-e2) / 4);
  double frac = std::ldexp(a, 56 - 4 * k);
  auto mant = static_cast<std::uint64_t>(std::llround(frac));
  if (mant >= (1ull << 56)) {
    mant >>= 4;
    k += 1;
  }
  const int exp_field = k + 64;
  if (exp_field < 0 || exp_field > 127)
    throw RangeError("value out of excess-64 real range");
  std::uint64_t bits = (static_cast<std::uint64_t>(exp_field) << 56) | mant;
  if (neg) bits |= 1ull << 63;
  return bits;
}

namespace {

struct Reader {
  const std::vector<std::uint8_t>& b;
  std::size_t pos = 0;

  struct Record {
    std::size_t offset;
    std::uint8_t type;
    std::uint8_t dtype;
    const std::uint8_t* data;
    std::size_t len;  // payload bytes
  };

  bool done() const { return pos >= b.size(); }

  Record next() {
    const std::size_t off = pos;
    if (pos + 4 > b.size()) throw ParseError("truncated record header", off);
    const std::size_t len = (static_cast<std::size_t>(b[pos]) << 8) | b[pos + 1];
    if (len < 4) throw ParseError("record length below header size", off);
    if (pos + len > b.size()) throw ParseError("truncated record", off);
    Record r{off, b[pos + 2], b[pos + 3], b.data() + pos + 4, len - 4};
    if (r.dtype > 6) throw ParseError("unknown data-type code", off);
    pos += len;
    return r;
  }
};

std::int16_t read_i16(const std::uint8_t* p) {
  return static_cast<std::int16_t>((p[0] << 8) | p[1]);
}

std::int32_t read_i32(const std::uint8_t* p) {
  return static_cast<std::int32_t>((static_cast<std::uint32_t>(p[0]) << 24) |
                                   (static_cast<std::uint32_t>(p[1]) << 16) |
                                   (static_cast<std::uint32_t>(p[2]) << 8) |
                                   static_cast<std::uint32_t>(p[3]));
}

std::uint64_t read_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | p[i];
  return v;
}

std::string read_string(const Reader::Record& r) {
  std::size_t n = r.len;
  while (n > 0 && r.data[n - 1] == '\0') --n;
  return std::string(reinterpret_cast<const char*>(r.data), n);
}

std::vector<IVec2> read_xy(const Reader::Record& r) {
  if (r.len % 8 != 0) throw ParseError("XY record length not a multiple of 8", r.offset);
  std::vector<IVec2> pts(r.len / 8);
  for (std::size_t i = 0; i < pts.size(); ++i)
    pts[i] = {read_i32(r.data + 8 * i), read_i32(r.data + 8 * i + 4)};
  return pts;
}

// Pending element being parsed.
struct PendingElement {
  std::uint8_t kind = 0;
  std::size_t offset = 0;
  int layer = 0;
  int datatype = 0;
  bool has_width = false;
  std::int32_t width = 0;
  int pathtype = 0;
  std::vector<IVec2> xy;
  std::string sname;
  bool mirror_x = false;
  double rotation = 0;
  double mag = 1;
  int cols = 1, rows = 1;
};

std::vector<IVec2> close_and_dedup(std::vector<IVec2> pts, std::size_t offset) {
  if (pts.size() < 4 || !(pts.front() == pts.back()))
    throw ParseError("boundary polygon not closed", offset);
  pts.pop_back();
  std::vector<IVec2> out;
  for (const IVec2& p : pts)
    if (out.empty() || !(out.back() == p)) out.push_back(p);
  while (out.size() > 1 && out.front() == out.back()) out.pop_back();
  if (out.size() < 3) throw ParseError("boundary with fewer than 3 distinct vertices", offset);
  return out;
}

Polygon to_polygon(const std::vector<IVec2>& pts) {
  Polygon p(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    p[i] = {static_cast<double>(pts[i].x), static_cast<double>(pts[i].y)};
  return p;
}

// One rectangle per path segment, half-width offset plus square end caps.
std::vector<Boundary> path_to_boundaries(const PendingElement& e) {
  std::vector<Boundary> out;
  const double h = std::abs(static_cast<double>(e.width)) / 2.0;
  for (std::size_t i = 0; i + 1 < e.xy.size(); ++i) {
    const Vec2 a{static_cast<double>(e.xy[i].x), static_cast<double>(e.xy[i].y)};
    const Vec2 b{static_cast<double>(e.xy[i + 1].x), static_cast<double>(e.xy[i + 1].y)};
    Vec2 d = b - a;
    const double len = std::hypot(d.x, d.y);
    if (len == 0) continue;
    d = d * (1.0 / len);
    const Vec2 n{-d.y, d.x};
    const Vec2 a2 = a - d * h;
    const Vec2 b2 = b + d * h;
    Boundary box;
    box.layer = e.layer;
    box.datatype = e.datatype;
    auto rd = [](double v) { return static_cast<std::int32_t>(std::llround(v)); };
    box.vertices = {{rd(a2.x + n.x * h), rd(a2.y + n.y * h)},
                    {rd(b2.x + n.x * h), rd(b2.y + n.y * h)},
                    {rd(b2.x - n.x * h), rd(b2.y - n.y * h)},
                    {rd(a2.x - n.x * h), rd(a2.y - n.y * h)}};
    out.push_back(std::move(box));
  }
  return out;
}

void check_references(const LayoutDatabase& db) {
  for (const Cell& c : db.cells) {
    auto check = [&](const std::string& target) {
      if (db.cell_index(target) < 0)
        throw ParseError("reference to undefined cell \"" + target + "\"", 0);
    };
    for (const Sref& s : c.srefs) check(s.cell);
    for (const Aref& a : c.arefs) check(a.cell);
  }
  // cycle detection: 0 unvisited, 1 on stack, 2 done
  std::vector<int> color(db.cells.size(), 0);
  std::vector<std::string> stack;
  auto dfs = [&](auto&& self, int idx) -> void {
    color[idx] = 1;
    stack.push_back(db.cells[idx].name);
    auto visit = [&](const std::string& target) {
      const int t = db.cell_index(target);
      if (color[t] == 1) {
        std::string cycle;
        bool in_cycle = false;
        for (const std::string& s : stack) {
          if (s == target) in_cycle = true;
          if (in_cycle) cycle += s + " -> ";
        }
        throw CycleError("cyclic cell reference: " + cycle + target);
      }
      if (color[t] == 0) self(self, t);
    };
    for (const Sref& s : db.cells[idx].srefs) visit(s.cell);
    for (const Aref& a : db.cells[idx].arefs) visit(a.cell);
    stack.pop_back();
    color[idx] = 2;
  };
  for (std::size_t i = 0; i < db.cells.size(); ++i)
    if (color[i] == 0) dfs(dfs, static_cast<int>(i));
}

}  // namespace

LayoutDatabase parse_gdsii(const std::vector<std::uint8_t>& bytes) {
  Reader rd{bytes};
  LayoutDatabase db;
  bool saw_header = false, saw_units = false, saw_endlib = false;
  Cell* cur_cell = nullptr;
  PendingElement el;
  bool in_element = false;

  while (!rd.done()) {
    Reader::Record r = rd.next();
    if (!saw_header) {
      if (r.type != rec::HEADER)
        throw ParseError("stream does not begin with a HEADER record", r.offset);
      saw_header = true;
      continue;
    }
    if (in_element) {
      switch (r.type) {
        case rec::LAYER: el.layer = read_i16(r.data); continue;
        case rec::DATATYPE:
        case rec::BOXTYPE:
        case rec::TEXTTYPE:
        case rec::NODETYPE: el.datatype = read_i16(r.data); continue;
        case rec::WIDTH:
          el.has_width = true;
          el.width = read_i32(r.data);
          continue;
        case rec::PATHTYPE: el.pathtype = read_i16(r.data); continue;
        case rec::XY: el.xy = read_xy(r); continue;
        case rec::SNAME: el.sname = read_string(r); continue;
        case rec::COLROW:
          el.cols = read_i16(r.data);
          el.rows = read_i16(r.data + 2);
          continue;
        case rec::STRANS:
          el.mirror_x = (read_i16(r.data) & static_cast<std::int16_t>(0x8000)) != 0;
          continue;
        case rec::MAG: el.mag = gds_real8_decode(read_u64(r.data)); continue;
        case rec::ANGLE: el.rotation = gds_real8_decode(read_u64(r.data)); continue;
        case rec::STRING:
        case rec::PROPATTR:
        case rec::PROPVALUE:
          ++db.skipped_records;
          continue;
        case rec::ENDEL: break;
        default:
          throw ParseError("unexpected record inside element", r.offset);
      }
      // ENDEL: commit the element
      in_element = false;
      switch (el.kind) {
        case rec::BOUNDARY:
        case rec::BOX: {
          Boundary b;
          b.layer = el.layer;
          b.datatype = el.datatype;
          b.vertices = close_and_dedup(el.xy, el.offset);
          if (!polygon_is_simple(to_polygon(b.vertices)))
            throw ParseError("self-intersecting boundary polygon", el.offset);
          cur_cell->boundaries.push_back(std::move(b));
          break;
        }
        case rec::PATH: {
          if (!el.has_width || el.width == 0) {
            ++db.skipped_records;  // no width resolution
            break;
          }
          for (Boundary& b : path_to_boundaries(el))
            cur_cell->boundaries.push_back(std::move(b));
          break;
        }
        case rec::SREF: {
          if (el.xy.size() != 1)
            throw ParseError("SREF requires exactly one XY point", el.offset);
          cur_cell->srefs.push_back(
              {el.sname, el.xy[0], el.rotation, el.mirror_x, el.mag});
          break;
        }
        case rec::AREF: {
          if (el.xy.size() != 3)
            throw ParseError("AREF requires three XY points", el.offset);
          if (el.cols < 1 || el.rows < 1)
            throw ParseError("AREF with nonpositive COLROW", el.offset);
          Aref a;
          a.cell = el.sname;
          a.origin = el.xy[0];
          a.rotation = el.rotation;
          a.mirror_x = el.mirror_x;
          a.mag = el.mag;
          a.cols = el.cols;
          a.rows = el.rows;
          a.col_pitch = {(el.xy[1].x - el.xy[0].x) / static_cast<double>(el.cols),
                         (el.xy[1].y - el.xy[0].y) / static_cast<double>(el.cols)};
          a.row_pitch = {(el.xy[2].x - el.xy[0].x) / static_cast<double>(el.rows),
                         (el.xy[2].y - el.xy[0].y) / static_cast<double>(el.rows)};
          cur_cell->arefs.push_back(std::move(a));
          break;
        }
        default:
          ++db.skipped_records;  // TEXT, NODE
          break;
      }
      continue;
    }
    switch (r.type) {
      case rec::BGNLIB:
        break;
      case rec::LIBNAME:
        db.library_name = read_string(r);
        break;
      case rec::UNITS: {
        if (r.len < 16) throw ParseError("UNITS record too short", r.offset);
        const double db_in_user = gds_real8_decode(read_u64(r.data));
        const double db_in_m = gds_real8_decode(read_u64(r.data + 8));
        if (!(db_in_m > 0) || !(db_in_user > 0))
          throw ParseError("nonpositive UNITS values", r.offset);
        db.unit_db = db_in_m;
        db.unit_user = db_in_m / db_in_user;
        saw_units = true;
        break;
      }
      case rec::BGNSTR:
        if (cur_cell) throw ParseError("nested BGNSTR", r.offset);
        db.cells.emplace_back();
        cur_cell = &db.cells.back();
        break;
      case rec::STRNAME:
        if (!cur_cell) throw ParseError("STRNAME outside structure", r.offset);
        cur_cell->name = read_string(r);
        break;
      case rec::ENDSTR:
        if (!cur_cell) throw ParseError("ENDSTR outside structure", r.offset);
        cur_cell = nullptr;
        break;
      case rec::BOUNDARY:
      case rec::BOX:
      case rec::PATH:
      case rec::SREF:
      case rec::AREF:
      case rec::TEXT:
      case rec::NODE:
        if (!cur_cell) throw ParseError("element outside structure", r.offset);
        el = PendingElement{};
        el.kind = r.type;
        el.offset = r.offset;
        in_element = true;
        break;
      case rec::ENDLIB:
        saw_endlib = true;
        break;
      default:
        ++db.skipped_records;
        break;
    }
    if (saw_endlib) break;
  }
  if (!saw_header) throw ParseError("empty stream", 0);
  if (!saw_units) throw ParseError("missing UNITS record", bytes.size());
  if (!saw_endlib) throw ParseError("missing ENDLIB record", bytes.size());
  check_references(db);
  return db;
}

LayoutDatabase parse_gdsii_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path, 0);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_gdsii(bytes);
}

namespace {

struct Writer {
  std::vector<std::uint8_t> out;

  void record(std::uint8_t type, std::uint8_t dtype,
              const std::vector<std::uint8_t>& payload = {}) {
    const std::size_t len = payload.size() + 4;
    if (len > 0xFFFF) throw RangeError("record too long");
    out.push_back(static_cast<std::uint8_t>(len >> 8));
    out.push_back(static_cast<std::uint8_t>(len & 0xFF));
    out.push_back(type);
    out.push_back(dtype);
    out.insert(out.end(), payload.begin(), payload.end());
  }

  static void put_i16(std::vector<std::uint8_t>& p, std::int32_t v) {
    p.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
    p.push_back(static_cast<std::uint8_t>(v & 0xFF));
  }
  static void put_i32(std::vector<std::uint8_t>& p, std::int64_t v) {
    if (v < INT32_MIN || v > INT32_MAX)
      throw RangeError("coordinate exceeds signed 32-bit database units");
    for (int s = 24; s >= 0; s -= 8)
      p.push_back(static_cast<std::uint8_t>((v >> s) & 0xFF));
  }
  static void put_real8(std::vector<std::uint8_t>& p, double v) {
    const std::uint64_t bits = gds_real8_encode(v);
    for (int s = 56; s >= 0; s -= 8)
      p.push_back(static_cast<std::uint8_t>((bits >> s) & 0xFF));
  }
  static std::vector<std::uint8_t> str(const std::string& s) {
    std::vector<std::uint8_t> p(s.begin(), s.end());
    if (p.size() % 2) p.push_back('\0');
    return p;
  }

  void strans(bool mirror, double rotation, double mag) {
    if (mirror || rotation != 0 || mag != 1) {
      std::vector<std::uint8_t> p;
      put_i16(p, mirror ? static_cast<std::int16_t>(0x8000) : 0);
      record(rec::STRANS, 1, p);
    }
    if (mag != 1) {
      std::vector<std::uint8_t> p;
      put_real8(p, mag);
      record(rec::MAG, 5, p);
    }
    if (rotation != 0) {
      std::vector<std::uint8_t> p;
      put_real8(p, rotation);
      record(rec::ANGLE, 5, p);
    }
  }
};

}  // namespace

std::vector<std::uint8_t> write_gdsii(const LayoutDatabase& db) {
  Writer w;
  {
    std::vector<std::uint8_t> p;
    Writer::put_i16(p, 600);
    w.record(rec::HEADER, 2, p);
  }
  w.record(rec::BGNLIB, 2, std::vector<std::uint8_t>(24, 0));
  w.record(rec::LIBNAME, 6, Writer::str(db.library_name));
  {
    std::vector<std::uint8_t> p;
    Writer::put_real8(p, db.unit_db / db.unit_user);
    Writer::put_real8(p, db.unit_db);
    w.record(rec::UNITS, 5, p);
  }
  for (const Cell& c : db.cells) {
    w.record(rec::BGNSTR, 2, std::vector<std::uint8_t>(24, 0));
    w.record(rec::STRNAME, 6, Writer::str(c.name));
    for (const Boundary& b : c.boundaries) {
      w.record(rec::BOUNDARY, 0);
      std::vector<std::uint8_t> p;
      Writer::put_i16(p, b.layer);
      w.record(rec::LAYER, 2, p);
      p.clear();
      Writer::put_i16(p, b.datatype);
      w.record(rec::DATATYPE, 2, p);
      p.clear();
      for (const IVec2& v : b.vertices) {
        Writer::put_i32(p, v.x);
        Writer::put_i32(p, v.y);
      }
      Writer::put_i32(p, b.vertices.front().x);
      Writer::put_i32(p, b.vertices.front().y);
      w.record(rec::XY, 3, p);
      w.record(rec::ENDEL, 0);
    }
    for (const Sref& s : c.srefs) {
      w.record(rec::SREF, 0);
      w.record(rec::SNAME, 6, Writer::str(s.cell));
      w.strans(s.mirror_x, s.rotation, s.mag);
      std::vector<std::uint8_t> p;
      Writer::put_i32(p, s.origin.x);
      Writer::put_i32(p, s.origin.y);
      w.record(rec::XY, 3, p);
      w.record(rec::ENDEL, 0);
    }
    for (const Aref& a : c.arefs) {
      w.record(rec::AREF, 0);
      w.record(rec::SNAME, 6, Writer::str(a.cell));
      w.strans(a.mirror_x, a.rotation, a.mag);
      std::vector<std::uint8_t> p;
      Writer::put_i16(p, a.cols);
      Writer::put_i16(p, a.rows);
      w.record(rec::COLROW, 2, p);
      p.clear();
      Writer::put_i32(p, a.origin.x);
      Writer::put_i32(p, a.origin.y);
      Writer::put_i32(p, std::llround(a.origin.x + a.cols * a.col_pitch.x));
      Writer::put_i32(p, std::llround(a.origin.y + a.cols * a.col_pitch.y));
      Writer::put_i32(p, std::llround(a.origin.x + a.rows * a.row_pitch.x));
      Writer::put_i32(p, std::llround(a.origin.y + a.rows * a.row_pitch.y));
      w.record(rec::XY, 3, p);
      w.record(rec::ENDEL, 0);
    }
    w.record(rec::ENDSTR, 0);
  }
  w.record(rec::ENDLIB, 0);
  return w.out;
}

void write_gdsii_file(const LayoutDatabase& db, const std::string& path) {
  const std::vector<std::uint8_t> bytes = write_gdsii(db);
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

namespace {

// Affine placement: p -> linear * p + t, all in database units.
struct Xform {
  double m00 = 1, m01 = 0, m10 = 0, m11 = 1;
  Vec2 t;

  Vec2 apply(Vec2 p) const {
    return {m00 * p.x + m01 * p.y + t.x, m10 * p.x + m11 * p.y + t.y};
  }
  Xform compose(const Xform& inner) const {
    Xform r;
    r.m00 = m00 * inner.m00 + m01 * inner.m10;
    r.m01 = m00 * inner.m01 + m01 * inner.m11;
    r.m10 = m10 * inner.m00 + m11 * inner.m10;
    r.m11 = m10 * inner.m01 + m11 * inner.m11;
    r.t = apply(inner.t);
    return r;
  }
};

Xform placement_xform(Vec2 origin, double rotation, bool mirror_x, double mag) {
  if (mag != 1.0)
    throw UnsupportedError("reference magnification != 1 is not supported");
  const double q = rotation / 90.0;
  const int k = static_cast<int>(std::llround(q));
  if (std::abs(q - k) > 1e-9)
    throw UnsupportedError("reference rotation must be a multiple of 90 degrees");
  static const int cs[4] = {1, 0, -1, 0};
  static const int sn[4] = {0, 1, 0, -1};
  const int kk = ((k % 4) + 4) % 4;
  const double my = mirror_x ? -1.0 : 1.0;  // GDSII mirrors about the x axis
  Xform x;
  x.m00 = cs[kk];
  x.m01 = -sn[kk] * my;
  x.m10 = sn[kk];
  x.m11 = cs[kk] * my;
  x.t = origin;
  return x;
}

void flatten_cell(const LayoutDatabase& db, int cell_idx, LayerKey key,
                  const Xform& xf, std::vector<Polygon>& out) {
  const Cell& c = db.cells[cell_idx];
  for (const Boundary& b : c.boundaries) {
    if (b.layer != key.layer || b.datatype != key.datatype) continue;
    Polygon p(b.vertices.size());
    for (std::size_t i = 0; i < b.vertices.size(); ++i)
      p[i] = xf.apply({static_cast<double>(b.vertices[i].x),
                       static_cast<double>(b.vertices[i].y)});
    out.push_back(std::move(p));
  }
  for (const Sref& s : c.srefs) {
    const Xform child = xf.compose(placement_xform(
        {static_cast<double>(s.origin.x), static_cast<double>(s.origin.y)},
        s.rotation, s.mirror_x, s.mag));
    flatten_cell(db, db.cell_index(s.cell), key, child, out);
  }
  for (const Aref& a : c.arefs) {
    for (int r = 0; r < a.rows; ++r) {
      for (int col = 0; col < a.cols; ++col) {
        const Vec2 o{a.origin.x + col * a.col_pitch.x + r * a.row_pitch.x,
                     a.origin.y + col * a.col_pitch.y + r * a.row_pitch.y};
        const Xform child =
            xf.compose(placement_xform(o, a.rotation, a.mirror_x, a.mag));
        flatten_cell(db, db.cell_index(a.cell), key, child, out);
      }
    }
  }
}

}  // namespace

PolygonSet flatten_layer(const LayoutDatabase& db, const std::string& top_cell,
                         LayerKey key) {
  const int idx = db.cell_index(top_cell);
  if (idx < 0) throw Error("top cell \"" + top_cell + "\" not found");
  std::vector<Polygon> raw;
  flatten_cell(db, idx, key, Xform{}, raw);
  PolygonSet out;
  out.layer_key = key;
  out.polygons.reserve(raw.size());
  for (Polygon& p : raw) {
    for (Vec2& v : p) v = v * db.unit_db;  // db units -> meters
    ensure_ccw(p);
    out.polygons.push_back(std::move(p));
  }
  return out;
}

std::vector<LayerKey> layer_keys(const LayoutDatabase& db) {
  std::set<std::pair<int, int>> keys;
  for (const Cell& c : db.cells)
    for (const Boundary& b : c.boundaries) keys.insert({b.layer, b.datatype});
  std::vector<LayerKey> out;
  for (auto [l, d] : keys) out.push_back({l, d});
  return out;
}

}  // namespace beol

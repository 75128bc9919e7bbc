#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include "gapf/error.hpp"
#include "gapf/mesh.hpp"

namespace gapf {

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorCode::kMeshLoad, what); }

void add_polygon(TriangleMesh& mesh, const std::vector<std::int64_t>& poly) {
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
    mesh.faces.push_back({static_cast<std::uint32_t>(poly[0]), static_cast<std::uint32_t>(poly[k]),
                          static_cast<std::uint32_t>(poly[k + 1])});
  }
}

// ---------------------------------------------------------------------------
// PLY

enum class PlyFormat { kAscii, kBinaryLittle, kBinaryBig };

enum class PlyType { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

PlyType parse_ply_type(const std::string& s) {
  if (s == "char" || s == "int8") return PlyType::kInt8;
  if (s == "uchar" || s == "uint8") return PlyType::kUInt8;
  if (s == "short" || s == "int16") return PlyType::kInt16;
  if (s == "ushort" || s == "uint16") return PlyType::kUInt16;
  if (s == "int" || s == "int32") return PlyType::kInt32;
  if (s == "uint" || s == "uint32") return PlyType::kUInt32;
  if (s == "float" || s == "float32") return PlyType::kFloat32;
  if (s == "double" || s == "float64") return PlyType::kFloat64;
  fail("PLY: unknown property type '" + s + "'");
}

std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::kInt8:
    case PlyType::kUInt8: return 1;
    case PlyType::kInt16:
    case PlyType::kUInt16: return 2;
    case PlyType::kInt32:
    case PlyType::kUInt32:
    case PlyType::kFloat32: return 4;
    case PlyType::kFloat64: return 8;
  }
  return 0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::kFloat32;
  bool is_list = false;
  PlyType count_type = PlyType::kUInt8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

class PlyReader {
 public:
  PlyReader(std::istream& in, PlyFormat format) : in_(in), format_(format) {}

  double read(PlyType t) {
    if (format_ == PlyFormat::kAscii) {
      double v = 0;
      if (!(in_ >> v)) fail("PLY: truncated ASCII body");
      return v;
    }
    unsigned char buf[8];
    const std::size_t n = ply_size(t);
    if (!in_.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n))) fail("PLY: truncated binary body");
    const bool swap = (format_ == PlyFormat::kBinaryBig) == (std::endian::native == std::endian::little);
    if (swap) std::reverse(buf, buf + n);
    switch (t) {
      case PlyType::kInt8: return static_cast<std::int8_t>(buf[0]);
      case PlyType::kUInt8: return buf[0];
      case PlyType::kInt16: return decode<std::int16_t>(buf);
      case PlyType::kUInt16: return decode<std::uint16_t>(buf);
      case PlyType::kInt32: return decode<std::int32_t>(buf);
      case PlyType::kUInt32: return decode<std::uint32_t>(buf);
      case PlyType::kFloat32: return decode<float>(buf);
      case PlyType::kFloat64: return decode<double>(buf);
    }
    return 0;
  }

 private:
  template <typename T>
  static double decode(const unsigned char* buf) {
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return static_cast<double>(v);
  }

  std::istream& in_;
  PlyFormat format_;
};

}  // namespace

TriangleMesh read_obj(std::istream& in, double scale) {
  TriangleMesh mesh;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::int64_t> poly;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) fail("OBJ: malformed vertex on line " + std::to_string(line_no));
      mesh.vertices.emplace_back(x * scale, y * scale, z * scale);
    } else if (tag == "f") {
      poly.clear();
      std::string tok;
      while (ls >> tok) {
        // v, v/vt, v//vn, v/vt/vn; negative indices count from the end.
        const std::int64_t idx = std::stoll(tok.substr(0, tok.find('/')));
        const auto nv = static_cast<std::int64_t>(mesh.vertices.size());
        const std::int64_t resolved = idx > 0 ? idx - 1 : nv + idx;
        if (idx == 0 || resolved < 0 || resolved >= nv) {
          fail("OBJ: face index out of range on line " + std::to_string(line_no));
        }
        poly.push_back(resolved);
      }
      if (poly.size() < 3) fail("OBJ: face with fewer than 3 vertices on line " + std::to_string(line_no));
      add_polygon(mesh, poly);
    }
  }
  return remove_degenerate_faces(std::move(mesh));
}

TriangleMesh read_ply(std::istream& in, double scale) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) fail("PLY: missing magic");
  PlyFormat format = PlyFormat::kAscii;
  std::vector<PlyElement> elements;
  bool header_done = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "format") {
      std::string f;
      ls >> f;
      if (f == "ascii") format = PlyFormat::kAscii;
      else if (f == "binary_little_endian") format = PlyFormat::kBinaryLittle;
      else if (f == "binary_big_endian") format = PlyFormat::kBinaryBig;
      else fail("PLY: unknown format '" + f + "'");
    } else if (tag == "element") {
      PlyElement e;
      ls >> e.name >> e.count;
      elements.push_back(std::move(e));
    } else if (tag == "property") {
      if (elements.empty()) fail("PLY: property before element");
      PlyProperty p;
      std::string type;
      ls >> type;
      if (type == "list") {
        std::string count_type, item_type;
        ls >> count_type >> item_type >> p.name;
        p.is_list = true;
        p.count_type = parse_ply_type(count_type);
        p.type = parse_ply_type(item_type);
      } else {
        p.type = parse_ply_type(type);
        ls >> p.name;
      }
      elements.back().properties.push_back(std::move(p));
    } else if (tag == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) fail("PLY: missing end_header");

  TriangleMesh mesh;
  PlyReader reader(in, format);
  std::vector<std::int64_t> poly;
  for (const auto& e : elements) {
    for (std::size_t i = 0; i < e.count; ++i) {
      Eigen::Vector3d v = Eigen::Vector3d::Zero();
      poly.clear();
      for (const auto& p : e.properties) {
        if (p.is_list) {
          const auto n = static_cast<std::size_t>(reader.read(p.count_type));
          const bool is_face = e.name == "face" && (p.name == "vertex_indices" || p.name == "vertex_index");
          for (std::size_t k = 0; k < n; ++k) {
            const double value = reader.read(p.type);
            if (is_face) poly.push_back(static_cast<std::int64_t>(value));
          }
        } else {
          const double value = reader.read(p.type);
          if (e.name == "vertex") {
            if (p.name == "x") v.x() = value;
            else if (p.name == "y") v.y() = value;
            else if (p.name == "z") v.z() = value;
          }
        }
      }
      if (e.name == "vertex") {
        mesh.vertices.push_back(v * scale);
      } else if (e.name == "face") {
        if (poly.size() < 3) fail("PLY: face with fewer than 3 vertices");
        for (auto idx : poly) {
          if (idx < 0 || static_cast<std::size_t>(idx) >= mesh.vertices.size()) fail("PLY: face index out of range");
        }
        add_polygon(mesh, poly);
      }
    }
  }
  return remove_degenerate_faces(std::move(mesh));
}

TriangleMesh load_mesh(const std::filesystem::path& path, double scale) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open mesh file '" + path.string() + "'");
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  try {
    if (ext == ".obj") return read_obj(in, scale);
    if (ext == ".ply") return read_ply(in, scale);
  } catch (const Error& e) {
    throw Error(ErrorCode::kMeshLoad, path.string() + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kMeshLoad, path.string() + ": " + e.what());
  }
  fail("unsupported mesh extension '" + ext + "' for '" + path.string() + "'");
}

void write_obj(const TriangleMesh& mesh, std::ostream& out) {
  // Shortest text that reads back to the same double.
  auto put = [&out](double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    out << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
  };
  for (const auto& v : mesh.vertices) {
    out << 'v';
    put(v.x());
    put(v.y());
    put(v.z());
    out << '\n';
  }
  for (const auto& f : mesh.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

}  // namespace gapf

#include "jpil/mesh_io.hpp"
#include "jpil/error.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <optional>
#include <cstring>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string_view>

static_assert(std::endian::native == std::endian::little, "binary PLY I/O assumes little-endian");

namespace jpil {

namespace {

[[noreturn]] void parse_error(std::size_t offset, const std::string& what) {
  throw Error(ErrorKind::Parse, what + " at byte " + std::to_string(offset));
}

enum class Scalar { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

std::optional<Scalar> scalar_from_name(std::string_view s) {
  if (s == "char" || s == "int8") return Scalar::Int8;
  if (s == "uchar" || s == "uint8") return Scalar::UInt8;
  if (s == "short" || s == "int16") return Scalar::Int16;
  if (s == "ushort" || s == "uint16") return Scalar::UInt16;
  if (s == "int" || s == "int32") return Scalar::Int32;
  if (s == "uint" || s == "uint32") return Scalar::UInt32;
  if (s == "float" || s == "float32") return Scalar::Float32;
  if (s == "double" || s == "float64") return Scalar::Float64;
  return std::nullopt;
}

struct Property {
  std::string name;
  Scalar type = Scalar::Float64;
  bool is_list = false;
  Scalar count_type = Scalar::UInt8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
};

// Sequential reader over the body of a PLY file, in either encoding.
class PlyBody {
 public:
  PlyBody(std::string_view data, std::size_t offset, bool binary)
      : data_(data), pos_(offset), binary_(binary) {}

  double read(Scalar type) {
    if (binary_) return read_binary(type);
    return read_ascii();
  }

  std::size_t offset() const { return pos_; }

 private:
  template <typename T>
  double take() {
    if (pos_ + sizeof(T) > data_.size()) parse_error(pos_, "truncated binary PLY body");
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return static_cast<double>(v);
  }

  double read_binary(Scalar type) {
    switch (type) {
      case Scalar::Int8: return take<std::int8_t>();
      case Scalar::UInt8: return take<std::uint8_t>();
      case Scalar::Int16: return take<std::int16_t>();
      case Scalar::UInt16: return take<std::uint16_t>();
      case Scalar::Int32: return take<std::int32_t>();
      case Scalar::UInt32: return take<std::uint32_t>();
      case Scalar::Float32: return take<float>();
      case Scalar::Float64: return take<double>();
    }
    return 0.0;
  }

  double read_ascii() {
    while (pos_ < data_.size() && std::isspace(static_cast<unsigned char>(data_[pos_]))) ++pos_;
    if (pos_ >= data_.size()) parse_error(pos_, "truncated ascii PLY body");
    double v = 0.0;
    const char* first = data_.data() + pos_;
    const char* last = data_.data() + data_.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc()) parse_error(pos_, "malformed number in ascii PLY body");
    pos_ += static_cast<std::size_t>(ptr - first);
    return v;
  }

  std::string_view data_;
  std::size_t pos_;
  bool binary_;
};

std::size_t checked_index(double v, std::size_t offset) {
  if (!(v >= 0.0) || v != std::floor(v) || v > 4294967295.0) {
    parse_error(offset, "invalid vertex index");
  }
  return static_cast<std::size_t>(v);
}

void finish(TriangleMesh& mesh) {
  const std::size_t dropped = mesh.drop_degenerate();
  if (dropped > 0) {
    std::cerr << "warning: dropped " << dropped << " degenerate triangle(s)\n";
  }
}

}  // namespace

TriangleMesh read_ply(std::span<const std::byte> bytes) {
  const std::string_view data(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  if (data.substr(0, 3) != "ply") parse_error(0, "missing PLY magic");

  std::size_t pos = 0;
  bool binary = false;
  bool saw_format = false;
  std::vector<Element> elements;
  for (;;) {
    const std::size_t eol = data.find('\n', pos);
    if (eol == std::string_view::npos) parse_error(pos, "unterminated PLY header");
    std::string line(data.substr(pos, eol - pos));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t line_offset = pos;
    pos = eol + 1;

    std::istringstream ls(line);
    std::string keyword;
    ls >> keyword;
    if (keyword == "end_header") break;
    if (keyword == "ply" || keyword == "comment" || keyword == "obj_info" || keyword.empty()) {
      continue;
    }
    if (keyword == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "ascii") {
        binary = false;
      } else if (fmt == "binary_little_endian") {
        binary = true;
      } else {
        parse_error(line_offset, "unsupported PLY format '" + fmt + "'");
      }
      saw_format = true;
    } else if (keyword == "element") {
      Element e;
      long long count = -1;
      ls >> e.name >> count;
      if (!ls || count < 0) parse_error(line_offset, "malformed element line");
      e.count = static_cast<std::size_t>(count);
      elements.push_back(std::move(e));
    } else if (keyword == "property") {
      if (elements.empty()) parse_error(line_offset, "property before element");
      Property p;
      std::string type;
      ls >> type;
      if (type == "list") {
        std::string count_type;
        std::string item_type;
        ls >> count_type >> item_type >> p.name;
        auto ct = scalar_from_name(count_type);
        auto it = scalar_from_name(item_type);
        if (!ct || !it) parse_error(line_offset, "unknown list property type");
        p.is_list = true;
        p.count_type = *ct;
        p.type = *it;
      } else {
        ls >> p.name;
        auto t = scalar_from_name(type);
        if (!t) parse_error(line_offset, "unknown property type '" + type + "'");
        p.type = *t;
      }
      elements.back().properties.push_back(p);
    } else {
      parse_error(line_offset, "unexpected header keyword '" + keyword + "'");
    }
  }
  if (!saw_format) parse_error(pos, "PLY header lacks a format line");

  TriangleMesh mesh;
  PlyBody body(data, pos, binary);
  for (const Element& e : elements) {
    if (e.name == "vertex") {
      int xi = -1, yi = -1, zi = -1;
      for (std::size_t k = 0; k < e.properties.size(); ++k) {
        if (e.properties[k].name == "x") xi = static_cast<int>(k);
        if (e.properties[k].name == "y") yi = static_cast<int>(k);
        if (e.properties[k].name == "z") zi = static_cast<int>(k);
      }
      if (xi < 0 || yi < 0 || zi < 0) parse_error(pos, "vertex element lacks x/y/z");
      mesh.vertices.reserve(e.count);
      for (std::size_t n = 0; n < e.count; ++n) {
        Point3 v;
        for (std::size_t k = 0; k < e.properties.size(); ++k) {
          const Property& p = e.properties[k];
          if (p.is_list) {
            const auto len = checked_index(body.read(p.count_type), body.offset());
            for (std::size_t i = 0; i < len; ++i) body.read(p.type);
            continue;
          }
          const double value = body.read(p.type);
          if (static_cast<int>(k) == xi) v.x() = value;
          if (static_cast<int>(k) == yi) v.y() = value;
          if (static_cast<int>(k) == zi) v.z() = value;
        }
        if (!v.allFinite()) parse_error(body.offset(), "non-finite vertex coordinate");
        mesh.vertices.push_back(v);
      }
    } else {
      const bool is_face = e.name == "face";
      for (std::size_t n = 0; n < e.count; ++n) {
        bool took_indices = false;
        for (const Property& p : e.properties) {
          if (!p.is_list) {
            body.read(p.type);
            continue;
          }
          const std::size_t start = body.offset();
          const auto len = checked_index(body.read(p.count_type), start);
          std::vector<std::uint32_t> poly(len);
          for (auto& idx : poly) {
            idx = static_cast<std::uint32_t>(checked_index(body.read(p.type), body.offset()));
          }
          if (!is_face || took_indices) continue;
          took_indices = true;
          if (len < 3) parse_error(start, "face with fewer than 3 vertices");
          for (std::size_t i = 1; i + 1 < len; ++i) {
            mesh.triangles.push_back({poly[0], poly[i], poly[i + 1]});
          }
        }
      }
    }
  }
  for (const Triangle& t : mesh.triangles) {
    for (auto idx : t) {
      if (idx >= mesh.vertices.size()) parse_error(body.offset(), "face index out of range");
    }
  }
  finish(mesh);
  return mesh;
}

namespace {
// Records that carry nothing we use.
const std::set<std::string, std::less<>> kObjIgnored{"vt", "vn", "vp", "o", "g", "s", "l", "p",
                                                     "usemtl", "mtllib"};
}  // namespace

TriangleMesh read_obj(std::span<const std::byte> bytes) {
  const std::string_view data(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  TriangleMesh mesh;
  std::size_t pos = 0;
  while (pos < data.size()) {
    std::size_t eol = data.find('\n', pos);
    if (eol == std::string_view::npos) eol = data.size();
    const std::size_t line_offset = pos;
    std::string line(data.substr(pos, eol - pos));
    pos = eol + 1;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      Point3 v;
      ls >> v.x() >> v.y() >> v.z();
      if (!ls || !v.allFinite()) parse_error(line_offset, "malformed OBJ vertex");
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<std::uint32_t> poly;
      std::string token;
      while (ls >> token) {
        long long idx = 0;
        const std::size_t slash = token.find('/');
        const std::string head = token.substr(0, slash);
        auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
        if (ec != std::errc() || idx == 0) parse_error(line_offset, "malformed OBJ face index");
        if (idx < 0) idx += static_cast<long long>(mesh.vertices.size()) + 1;
        if (idx < 1 || idx > static_cast<long long>(mesh.vertices.size())) {
          parse_error(line_offset, "OBJ face index out of range");
        }
        poly.push_back(static_cast<std::uint32_t>(idx - 1));
      }
      if (poly.size() < 3) parse_error(line_offset, "OBJ face with fewer than 3 vertices");
      for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
        mesh.triangles.push_back({poly[0], poly[i], poly[i + 1]});
      }
    } else if (!tag.empty() && tag[0] != '#' && !kObjIgnored.contains(tag)) {
      parse_error(line_offset, "unknown OBJ record '" + tag + "'");
    }
  }
  finish(mesh);
  return mesh;
}

TriangleMesh read_mesh(std::span<const std::byte> bytes) {
  if (bytes.size() >= 3 && std::memcmp(bytes.data(), "ply", 3) == 0) return read_ply(bytes);
  return read_obj(bytes);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Parse, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Internal, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

TriangleMesh read_mesh(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  return read_mesh(as_bytes(data));
}

namespace {

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace

std::string ply_bytes(const TriangleMesh& mesh) {
  std::string out = "ply\nformat binary_little_endian 1.0\nelement vertex " +
                    std::to_string(mesh.vertices.size()) +
                    "\nproperty double x\nproperty double y\nproperty double z\nelement face " +
                    std::to_string(mesh.triangles.size()) +
                    "\nproperty list uchar uint vertex_indices\nend_header\n";
  for (const Point3& v : mesh.vertices) {
    put(out, v.x());
    put(out, v.y());
    put(out, v.z());
  }
  for (const Triangle& t : mesh.triangles) {
    put<std::uint8_t>(out, 3);
    for (auto idx : t) put<std::uint32_t>(out, idx);
  }
  return out;
}

std::string ply_bytes(const PointCloud& cloud) {
  std::string out = "ply\nformat binary_little_endian 1.0\nelement vertex " +
                    std::to_string(cloud.points.size()) +
                    "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  for (const Point3& v : cloud.points) {
    put(out, v.x());
    put(out, v.y());
    put(out, v.z());
  }
  return out;
}

void write_ply(const std::filesystem::path& path, const TriangleMesh& mesh) {
  write_file(path, ply_bytes(mesh));
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud) {
  write_file(path, ply_bytes(cloud));
}

}  // namespace jpil

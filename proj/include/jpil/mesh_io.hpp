#pragma once

#include "jpil/mesh.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>

namespace jpil {

// PLY (ascii or binary_little_endian; vertex x,y,z as float or double; faces
// as index lists) and OBJ (v/f records). Parse failures throw Error(Parse)
// with the byte offset. Degenerate triangles are dropped with a warning on
// stderr.
TriangleMesh read_ply(std::span<const std::byte> bytes);
TriangleMesh read_obj(std::span<const std::byte> bytes);
// Detects the format from the content.
TriangleMesh read_mesh(std::span<const std::byte> bytes);
TriangleMesh read_mesh(const std::filesystem::path& path);

std::string ply_bytes(const TriangleMesh& mesh);  // binary little-endian, float64
std::string ply_bytes(const PointCloud& cloud);   // vertex-only
void write_ply(const std::filesystem::path& path, const TriangleMesh& mesh);
void write_ply(const std::filesystem::path& path, const PointCloud& cloud);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

inline std::span<const std::byte> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::byte*>(s.data()), s.size()};
}

}  // namespace jpil

#pragma once

// Binary and ASCII STL. The binary layout is written byte by byte in little
// endian order, so output is identical across hosts.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <array>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fluidcc/diagnostics.hpp"
#include "fluidcc/mesh.hpp"

#ifndef FLUIDCC_VERSION
#define FLUIDCC_VERSION "0.1.0"
#endif

namespace fluidcc {

inline constexpr std::size_t kStlHeaderSize = 80;

inline std::size_t stlBinarySize(std::size_t triangles) { return 84 + 50 * triangles; }

inline Vec3 facetNormal(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 n = cross(b - a, c - a);
  const double l = norm(n);
  return l > 0 ? n / l : Vec3{};
}

namespace detail {

inline void putU32(std::ostream& os, std::uint32_t v) {
  const char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff),
                     char((v >> 24) & 0xff)};
  os.write(b, 4);
}

inline void putF32(std::ostream& os, double v) { putU32(os, std::bit_cast<std::uint32_t>(float(v))); }

inline std::uint32_t getU32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}

}  // namespace detail

inline void writeStlBinary(std::span<const TriMesh> meshes, std::ostream& os) {
  std::string header = "fluidcc " FLUIDCC_VERSION;
  header.resize(kStlHeaderSize, ' ');
  os.write(header.data(), static_cast<std::streamsize>(header.size()));
  std::uint64_t count = 0;
  for (const auto& m : meshes) count += m.triangles.size();
  if (count > 0xffffffffu) throw MeshError("too many triangles for binary STL");
  detail::putU32(os, static_cast<std::uint32_t>(count));
  for (const auto& m : meshes)
    for (const auto& t : m.triangles) {
      // Normals from the float-rounded vertices, as a reader would see them.
      Vec3 v[3];
      for (int i = 0; i < 3; ++i) {
        const Vec3& p = m.vertices[t[i]];
        v[i] = {float(p.x), float(p.y), float(p.z)};
      }
      const Vec3 n = facetNormal(v[0], v[1], v[2]);
      for (double c : {n.x, n.y, n.z}) detail::putF32(os, c);
      for (const auto& p : v)
        for (double c : {p.x, p.y, p.z}) detail::putF32(os, c);
      os.put(0).put(0);
    }
  if (!os) throw Error("failed writing STL stream");
}

/// Reads binary STL into one indexed mesh; vertices are welded only when
/// their float bit patterns are identical.
inline TriMesh readStlBinary(std::istream& is) {
  unsigned char head[84];
  is.read(reinterpret_cast<char*>(head), 84);
  if (is.gcount() != 84) throw Error("truncated STL: missing header or triangle count");
  const std::uint32_t count = detail::getU32(head + 80);
  TriMesh m;
  m.label = "stl";
  std::map<std::array<std::uint32_t, 3>, std::uint32_t> weld;
  unsigned char rec[50];
  for (std::uint32_t t = 0; t < count; ++t) {
    is.read(reinterpret_cast<char*>(rec), 50);
    if (is.gcount() != 50)
      throw Error("truncated STL: header declares " + std::to_string(count) +
                  " triangles, data ends at " + std::to_string(t));
    Triangle tri{};
    for (int i = 0; i < 3; ++i) {
      std::array<std::uint32_t, 3> bits{};
      for (int c = 0; c < 3; ++c) bits[c] = detail::getU32(rec + 12 + 12 * i + 4 * c);
      auto [it, fresh] = weld.try_emplace(bits, static_cast<std::uint32_t>(m.vertices.size()));
      if (fresh)
        m.vertices.push_back({std::bit_cast<float>(bits[0]), std::bit_cast<float>(bits[1]),
                              std::bit_cast<float>(bits[2])});
      tri[i] = it->second;
    }
    m.triangles.push_back(tri);
  }
  if (is.peek() != std::char_traits<char>::eof())
    throw Error("STL triangle count mismatch: trailing data after " + std::to_string(count) +
                " triangles");
  return m;
}

inline void writeStlAscii(std::span<const TriMesh> meshes, std::ostream& os,
                          const std::string& name = "fluidcc") {
  char buf[160];
  os << "solid " << name << "\n";
  for (const auto& m : meshes)
    for (const auto& t : m.triangles) {
      const Vec3 &a = m.vertices[t[0]], &b = m.vertices[t[1]], &c = m.vertices[t[2]];
      const Vec3 n = facetNormal(a, b, c);
      std::snprintf(buf, sizeof buf, "  facet normal %.6e %.6e %.6e\n    outer loop\n", n.x, n.y, n.z);
      os << buf;
      for (const Vec3* p : {&a, &b, &c}) {
        std::snprintf(buf, sizeof buf, "      vertex %.6e %.6e %.6e\n", float(p->x), float(p->y),
                      float(p->z));
        os << buf;
      }
      os << "    endloop\n  endfacet\n";
    }
  os << "endsolid " << name << "\n";
}

}  // namespace fluidcc

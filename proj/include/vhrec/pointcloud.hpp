#pragma once

#include "vhrec/core.hpp"

namespace vhrec {

enum class PointSource : uint8_t { Visual = 0, Haptic = 1 };

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;        // empty, or one unit normal per point
  std::vector<PointSource> sources; // one tag per point

  size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_normals() const { return !normals.empty(); }

  void add(const Vec3& p, PointSource s) {
    points.push_back(p);
    sources.push_back(s);
  }
  void add(const Vec3& p, const Vec3& n, PointSource s) {
    points.push_back(p);
    normals.push_back(n);
    sources.push_back(s);
  }

  void append(const PointCloud& other) {
    if (has_normals() != other.has_normals() && !empty() && !other.empty())
      throw std::invalid_argument("append: normal presence mismatch");
    points.insert(points.end(), other.points.begin(), other.points.end());
    normals.insert(normals.end(), other.normals.begin(), other.normals.end());
    sources.insert(sources.end(), other.sources.begin(), other.sources.end());
  }

  size_t count(PointSource s) const {
    size_t n = 0;
    for (PointSource t : sources)
      if (t == s) ++n;
    return n;
  }

  void validate() const {
    if (!normals.empty() && normals.size() != points.size())
      throw std::invalid_argument("point/normal count mismatch");
    if (sources.size() != points.size())
      throw std::invalid_argument("point/source count mismatch");
    for (const Vec3& n : normals)
      if (!is_unit(n)) throw std::invalid_argument("normal is not unit length");
  }

  Aabb bounds() const {
    Aabb box;
    for (const Vec3& p : points) box.expand(p);
    return box;
  }

  Vec3 centroid() const {
    if (empty()) throw std::invalid_argument("centroid of empty cloud");
    Vec3 c;
    for (const Vec3& p : points) c += p;
    return c / (double)points.size();
  }
};

}  // namespace vhrec

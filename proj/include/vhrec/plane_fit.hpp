#pragma once

#include "vhrec/core.hpp"

namespace vhrec {

struct PlaneFit {
  Vec3 centroid;
  Vec3 normal;     // unit
  double rms = 0;  // RMS of point-to-plane residuals
};

// Least-squares plane through >= 3 points: centroid plus the smallest
// eigenvector of the scatter matrix (cyclic Jacobi on the 3x3 symmetric).
inline PlaneFit fit_plane(const std::vector<Vec3>& points) {
  if (points.size() < 3) throw std::invalid_argument("fit_plane: need at least 3 points");
  PlaneFit fit;
  for (const Vec3& p : points) fit.centroid += p;
  fit.centroid = fit.centroid / (double)points.size();

  double a[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  for (const Vec3& p : points) {
    const Vec3 d = p - fit.centroid;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) a[r][c] += d[r] * d[c];
  }

  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int sweep = 0; sweep < 32; ++sweep) {
    double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
    if (off < 1e-18) break;
    for (int p = 0; p < 2; ++p)
      for (int q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0) continue;
        const double theta = 0.5 * std::atan2(2 * a[p][q], a[q][q] - a[p][p]);
        const double c = std::cos(theta), s = std::sin(theta);
        for (int k = 0; k < 3; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
  }
  int smallest = 0;
  for (int k = 1; k < 3; ++k)
    if (a[k][k] < a[smallest][smallest]) smallest = k;
  fit.normal = normalized(Vec3{v[0][smallest], v[1][smallest], v[2][smallest]});

  double ss = 0;
  for (const Vec3& p : points) {
    const double d = dot(p - fit.centroid, fit.normal);
    ss += d * d;
  }
  fit.rms = std::sqrt(ss / (double)points.size());
  return fit;
}

}  // namespace vhrec

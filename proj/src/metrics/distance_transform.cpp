#include "argus/distance_transform.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace argus {

namespace {

constexpr std::int64_t kFar = std::numeric_limits<std::int64_t>::max() / 4;

std::int64_t isqrt(std::int64_t v) {
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(v)));
  while (r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  return r;
}

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher) over the finite
// sites of one row; writes exact squared distances.
void envelope_pass(const std::vector<std::int64_t>& f, std::vector<std::int64_t>& out) {
  const int n = static_cast<int>(f.size());
  std::vector<int> v;
  std::vector<double> z;
  v.reserve(n);
  z.reserve(n + 1);
  for (int q = 0; q < n; ++q) {
    if (f[q] >= kFar) continue;
    if (v.empty()) {
      v.push_back(q);
      z.push_back(-std::numeric_limits<double>::infinity());
      continue;
    }
    while (true) {
      const int p = v.back();
      const double s = static_cast<double>((f[q] + static_cast<std::int64_t>(q) * q) - (f[p] + static_cast<std::int64_t>(p) * p)) /
                       (2.0 * (q - p));
      // z.front() is -inf, so the first site is never popped
      if (s <= z.back()) {
        v.pop_back();
        z.pop_back();
        continue;
      }
      v.push_back(q);
      z.push_back(s);
      break;
    }
  }
  if (v.empty()) {
    std::fill(out.begin(), out.end(), kFar);
    return;
  }
  std::size_t k = 0;
  for (int q = 0; q < n; ++q) {
    while (k + 1 < v.size() && z[k + 1] < q) ++k;
    const std::int64_t dq = q - v[k];
    out[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

NearestForeground nearest_foreground(const BinMask& fg) {
  const int h = static_cast<int>(fg.rows());
  const int w = static_cast<int>(fg.cols());
  NearestForeground r{Plane<double>::Constant(h, w, std::numeric_limits<double>::infinity()),
                      Plane<int>::Constant(h, w, -1), Plane<int>::Constant(h, w, -1)};
  if (!fg.any()) return r;

  // column pass: squared distance to the nearest foreground row in the same column
  Plane<std::int64_t> g(h, w);
  for (int x = 0; x < w; ++x) {
    std::int64_t last = -1;
    for (int y = 0; y < h; ++y) {
      if (fg(y, x)) last = y;
      g(y, x) = last < 0 ? kFar : y - last;
    }
    last = -1;
    for (int y = h - 1; y >= 0; --y) {
      if (fg(y, x)) last = y;
      if (last >= 0 && last - y < g(y, x)) g(y, x) = last - y;
    }
    for (int y = 0; y < h; ++y) {
      if (g(y, x) < kFar) g(y, x) *= g(y, x);
    }
  }

  // row pass
  std::vector<std::int64_t> f(w);
  std::vector<std::int64_t> d2(w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f[x] = g(y, x);
    envelope_pass(f, d2);
    for (int x = 0; x < w; ++x) {
      const std::int64_t sq = d2[x];
      r.distance(y, x) = std::sqrt(static_cast<double>(sq));
      // First foreground pixel in row-major order on the circle of radius sqrt(sq).
      const std::int64_t reach = isqrt(sq);
      bool found = false;
      for (std::int64_t dy = -reach; dy <= reach && !found; ++dy) {
        const std::int64_t yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        const std::int64_t rem = sq - dy * dy;
        const std::int64_t dx = isqrt(rem);
        if (dx * dx != rem) continue;
        for (const std::int64_t xx : {x - dx, x + dx}) {
          if (xx < 0 || xx >= w || !fg(yy, xx)) continue;
          r.row(y, x) = static_cast<int>(yy);
          r.col(y, x) = static_cast<int>(xx);
          found = true;
          break;
        }
      }
    }
  }
  return r;
}

}  // namespace argus

#pragma once

// Deliberately naive reimplementation of the five measures on plain vectors.
// It must not include or call anything from the library under test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace naive {

struct Map {
  int h = 0;
  int w = 0;
  std::vector<double> v;  // row-major
  double at(int y, int x) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

struct Truth {
  int h = 0;
  int w = 0;
  std::vector<int> v;  // 0 / 1
  int at(int y, int x) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

inline constexpr double kEps = 1e-8;
inline constexpr double kSsimEps = 2.220446049250313e-16;

inline double mae(const Map& p, const Truth& g) {
  double s = 0;
  for (std::size_t i = 0; i < p.v.size(); ++i) s += std::fabs(p.v[i] - g.v[i]);
  return s / p.v.size();
}

inline double adaptive_f(const Map& p, const Truth& g) {
  double mean = 0;
  for (double x : p.v) mean += x;
  mean /= p.v.size();
  if (mean <= 0) return 0;
  const double tau = std::min(2 * mean, 1.0);
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < p.v.size(); ++i) {
    const bool on = p.v[i] >= tau;
    if (on && g.v[i]) tp += 1;
    if (on && !g.v[i]) fp += 1;
    if (!on && g.v[i]) fn += 1;
  }
  const double prec = tp + fp > 0 ? tp / (tp + fp) : 0;
  const double rec = tp + fn > 0 ? tp / (tp + fn) : 0;
  const double d = 0.3 * prec + rec;
  return d > 0 ? 1.3 * prec * rec / d : 0;
}

inline double e_measure(const Map& p, const Truth& g) {
  const double n = static_cast<double>(p.v.size());
  double mg = 0;
  for (int b : g.v) mg += b;
  mg /= n;
  double total = 0;
  for (int t = 0; t < 256; ++t) {
    const double th = t / 255.0;
    std::vector<double> bin(p.v.size());
    double mb = 0;
    for (std::size_t i = 0; i < p.v.size(); ++i) {
      bin[i] = p.v[i] >= th ? 1.0 : 0.0;
      mb += bin[i];
    }
    mb /= n;
    double e;
    if (mg == 0) {
      e = 1 - mb;
    } else if (mg == 1) {
      e = mb;
    } else {
      double acc = 0;
      for (std::size_t i = 0; i < p.v.size(); ++i) {
        const double pb = bin[i] - mb;
        const double pg = g.v[i] - mg;
        const double xi = 2 * pb * pg / (pb * pb + pg * pg + kEps);
        acc += (xi + 1) * (xi + 1) / 4;
      }
      e = acc / n;
    }
    total += e;
  }
  return total / 256;
}

inline void moments(const std::vector<double>& xs, double& mean, double& sd) {
  mean = 0;
  sd = 0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double var = 0;
  for (double x : xs) var += (x - mean) * (x - mean);
  sd = std::sqrt(var / xs.size());
}

inline double ssim(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double vx = 0, vy = 0, cxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    vx += (xs[i] - mx) * (xs[i] - mx);
    vy += (ys[i] - my) * (ys[i] - my);
    cxy += (xs[i] - mx) * (ys[i] - my);
  }
  vx /= n;
  vy /= n;
  cxy /= n;
  const double a = 4 * mx * my * cxy;
  const double b = (mx * mx + my * my) * (vx + vy);
  if (a != 0) return a / (b + kSsimEps);
  return b == 0 ? 1.0 : 0.0;
}

inline double s_measure(const Map& p, const Truth& g) {
  const int h = p.h, w = p.w;
  int fgc = 0;
  for (int b : g.v) fgc += b;
  const double mg = static_cast<double>(fgc) / (h * w);
  double mean_p = 0;
  for (double x : p.v) mean_p += x;
  mean_p /= p.v.size();
  if (fgc == 0) return 1 - mean_p;
  if (fgc == h * w) return mean_p;
  std::vector<double> fgv, bgv;
  double sy = 0, sx = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (g.at(y, x)) {
        fgv.push_back(p.at(y, x));
        sy += y;
        sx += x;
      } else {
        bgv.push_back(1 - p.at(y, x));
      }
    }
  }
  double mf, sf, mbk, sbk;
  moments(fgv, mf, sf);
  moments(bgv, mbk, sbk);
  const double so = mg * (2 * mf / (mf * mf + 1 + 2 * sf + kEps)) + (1 - mg) * (2 * mbk / (mbk * mbk + 1 + 2 * sbk + kEps));
  const int cy = static_cast<int>(std::floor(sy / fgc + 0.5));
  const int cx = static_cast<int>(std::floor(sx / fgc + 0.5));
  const int ys[3] = {0, cy, h};
  const int xs[3] = {0, cx, w};
  double sr = 0;
  for (int qi = 0; qi < 2; ++qi) {
    for (int qj = 0; qj < 2; ++qj) {
      std::vector<double> px, gy;
      int share = 0;
      for (int y = ys[qi]; y < ys[qi + 1]; ++y) {
        for (int x = xs[qj]; x < xs[qj + 1]; ++x) {
          px.push_back(p.at(y, x));
          gy.push_back(g.at(y, x));
          share += g.at(y, x);
        }
      }
      if (share == 0) continue;
      sr += static_cast<double>(share) / fgc * ssim(px, gy);
    }
  }
  return std::max(0.0, 0.5 * so + 0.5 * sr);
}

inline double weighted_f(const Map& p, const Truth& g) {
  const int h = p.h, w = p.w;
  std::vector<std::pair<int, int>> fg;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (g.at(y, x)) fg.push_back({y, x});
  if (fg.empty()) {
    double s = 0;
    for (double x : p.v) s += x;
    return s > 0 ? 0.0 : 1.0;
  }
  std::vector<double> err(p.v.size()), prop(p.v.size()), dist(p.v.size(), 0.0);
  for (std::size_t i = 0; i < p.v.size(); ++i) err[i] = std::fabs(p.v[i] - g.v[i]);
  prop = err;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (g.at(y, x)) continue;
      long best = -1;
      std::pair<int, int> arg{0, 0};
      for (const auto& [fy, fx] : fg) {
        const long d2 = static_cast<long>(fy - y) * (fy - y) + static_cast<long>(fx - x) * (fx - x);
        if (best < 0 || d2 < best) {
          best = d2;
          arg = {fy, fx};
        }
      }
      dist[y * w + x] = std::sqrt(static_cast<double>(best));
      prop[y * w + x] = err[arg.first * w + arg.second];
    }
  }
  double k[7][7];
  double ks = 0;
  for (int i = -3; i <= 3; ++i)
    for (int j = -3; j <= 3; ++j) {
      k[i + 3][j + 3] = std::exp(-(i * i + j * j) / 50.0);
      ks += k[i + 3][j + 3];
    }
  double fg_sum = 0, bg_sum = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double e = err[y * w + x];
      if (g.at(y, x)) {
        double ea = 0;
        for (int i = -3; i <= 3; ++i)
          for (int j = -3; j <= 3; ++j) {
            const int yy = std::min(std::max(y + i, 0), h - 1);
            const int xx = std::min(std::max(x + j, 0), w - 1);
            ea += k[i + 3][j + 3] / ks * prop[yy * w + xx];
          }
        fg_sum += ea < e ? ea : e;
      } else {
        bg_sum += e * (2 - std::exp(std::log(0.5) / 5 * dist[y * w + x]));
      }
    }
  }
  const double n = static_cast<double>(fg.size());
  const double r = 1 - fg_sum / n;
  const double tp = n - fg_sum;
  const double pr = tp / (tp + bg_sum + kEps);
  return 2 * pr * r / (pr + r + kEps);
}

}  // namespace naive

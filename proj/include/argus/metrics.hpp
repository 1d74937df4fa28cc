#pragma once

// Foreground-map evaluation measures used across the camouflaged-object
// literature: MAE, adaptive F-measure, mean E-measure, S-measure and
// weighted F-measure. Every measure takes a soft prediction in [0, 1] and a
// binary ground truth of the same shape and returns a value in [0, 1].

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "argus/distance_transform.hpp"
#include "argus/image.hpp"

namespace argus::metrics {

inline constexpr double kEps = 1e-8;
// Quadrant SSIM guard: machine epsilon, so identical maps score 1 even on sparse quadrants.
inline constexpr double kSsimEps = std::numeric_limits<double>::epsilon();
inline constexpr double kBetaSquared = 0.3;
inline constexpr double kStructureAlpha = 0.5;
inline constexpr int kEnhancedLevels = 256;

template <typename Scalar>
struct Values {
  Scalar mae = 0;
  Scalar f_beta = 0;
  Scalar e_phi = 0;
  Scalar s_alpha = 0;
  Scalar f_beta_w = 0;
};

using MetricValues = Values<double>;

template <typename Scalar>
Scalar mae(const Plane<Scalar>& pred, const BinMask& gt) {
  require_same_shape(pred, gt, "mae");
  return (pred - gt.template cast<Scalar>()).abs().mean();
}

// F-measure (beta^2 = 0.3) at the threshold min(2 * mean(pred), 1).
// An all-zero prediction has no positives and scores 0.
template <typename Scalar>
Scalar adaptive_fbeta(const Plane<Scalar>& pred, const BinMask& gt) {
  require_same_shape(pred, gt, "adaptive_fbeta");
  const Scalar mean = pred.mean();
  if (mean <= 0) return 0;
  const Scalar tau = std::min<Scalar>(2 * mean, 1);
  const BinMask b = pred >= tau;
  const auto tp = static_cast<Scalar>((b && gt).count());
  const auto fp = static_cast<Scalar>((b && !gt).count());
  const auto fn = static_cast<Scalar>((!b && gt).count());
  const Scalar precision = tp + fp > 0 ? tp / (tp + fp) : 0;
  const Scalar recall = tp + fn > 0 ? tp / (tp + fn) : 0;
  const Scalar denom = Scalar(kBetaSquared) * precision + recall;
  if (denom <= 0) return 0;
  return (1 + Scalar(kBetaSquared)) * precision * recall / denom;
}

namespace detail {

// Number of levels i / 255 (i = 0..255) that v reaches, i.e. 1 + max{i : i/255 <= v}.
template <typename Scalar>
int levels_reached(Scalar v) {
  int i = std::clamp(static_cast<int>(std::floor(v * 255)), -1, kEnhancedLevels - 1);
  while (i + 1 < kEnhancedLevels && static_cast<Scalar>(i + 1) / 255 <= v) ++i;
  while (i >= 0 && static_cast<Scalar>(i) / 255 > v) --i;
  return i + 1;
}

template <typename Scalar>
Scalar enhanced(Scalar bias_pred, Scalar bias_gt) {
  const Scalar xi = 2 * bias_pred * bias_gt / (bias_pred * bias_pred + bias_gt * bias_gt + Scalar(kEps));
  return (xi + 1) * (xi + 1) / 4;
}

}  // namespace detail

// Enhanced-alignment measure averaged over the 256 thresholds {0..255}/255.
// The per-threshold score depends only on the four (pred bit, gt bit)
// population counts, so the sweep runs on a cumulative histogram.
template <typename Scalar>
Scalar e_measure_mean(const Plane<Scalar>& pred, const BinMask& gt) {
  require_same_shape(pred, gt, "e_measure_mean");
  const auto n = static_cast<Scalar>(pred.size());
  std::array<long, kEnhancedLevels + 1> fg_hist{};
  std::array<long, kEnhancedLevels + 1> bg_hist{};
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    const int reach = detail::levels_reached(pred.data()[i]);
    (gt.data()[i] ? fg_hist : bg_hist)[reach] += 1;
  }
  // pixels on at level t are those with reach > t
  const long fg_total = gt.count();
  const long bg_total = static_cast<long>(pred.size()) - fg_total;
  const Scalar mu_gt = fg_total / n;
  long fg_on = fg_total - fg_hist[0];
  long bg_on = bg_total - bg_hist[0];

  Scalar sum = 0;
  for (int t = 0; t < kEnhancedLevels; ++t) {
    const Scalar on = static_cast<Scalar>(fg_on + bg_on);
    const Scalar mu_b = on / n;
    Scalar score;
    if (fg_total == 0) {
      score = 1 - mu_b;
    } else if (bg_total == 0) {
      score = mu_b;
    } else {
      const Scalar tp = static_cast<Scalar>(fg_on);
      const Scalar fp = static_cast<Scalar>(bg_on);
      const Scalar fn = static_cast<Scalar>(fg_total - fg_on);
      const Scalar tn = static_cast<Scalar>(bg_total - bg_on);
      score = (tp * detail::enhanced<Scalar>(1 - mu_b, 1 - mu_gt) + fp * detail::enhanced<Scalar>(1 - mu_b, -mu_gt) +
               fn * detail::enhanced<Scalar>(-mu_b, 1 - mu_gt) + tn * detail::enhanced<Scalar>(-mu_b, -mu_gt)) /
              n;
    }
    sum += score;
    fg_on -= fg_hist[t + 1];
    bg_on -= bg_hist[t + 1];
  }
  return sum / kEnhancedLevels;
}

namespace detail {

template <typename Scalar>
struct Moments {
  Scalar mean = 0;
  Scalar stddev = 0;
};

// Population moments of the selected entries.
template <typename Derived>
Moments<typename Derived::Scalar> masked_moments(const Eigen::ArrayBase<Derived>& v, const BinMask& select) {
  using Scalar = typename Derived::Scalar;
  const auto count = static_cast<Scalar>(select.count());
  if (count == 0) return {};
  const Scalar mean = select.select(v.derived(), Scalar(0)).sum() / count;
  const Scalar var = select.select((v.derived() - mean).square(), Scalar(0)).sum() / count;
  return {mean, std::sqrt(var)};
}

template <typename Scalar>
Scalar object_score(Moments<Scalar> m) {
  return 2 * m.mean / (m.mean * m.mean + 1 + 2 * m.stddev + Scalar(kEps));
}

// Structural similarity of one quadrant (population statistics).
template <typename Scalar>
Scalar quadrant_ssim(const Plane<Scalar>& x, const Plane<Scalar>& y) {
  const auto n = static_cast<Scalar>(x.size());
  const Scalar mx = x.mean();
  const Scalar my = y.mean();
  const Scalar vx = (x - mx).square().sum() / n;
  const Scalar vy = (y - my).square().sum() / n;
  const Scalar cxy = ((x - mx) * (y - my)).sum() / n;
  const Scalar a = 4 * mx * my * cxy;
  const Scalar b = (mx * mx + my * my) * (vx + vy);
  if (a != 0) return a / (b + Scalar(kSsimEps));
  return b == 0 ? Scalar(1) : Scalar(0);
}

}  // namespace detail

// Structure measure, alpha = 0.5: object-aware term on foreground/background
// moments plus region-aware SSIM over quadrants split at the GT centroid,
// each quadrant weighted by its share of the GT foreground.
template <typename Scalar>
Scalar s_measure(const Plane<Scalar>& pred, const BinMask& gt) {
  require_same_shape(pred, gt, "s_measure");
  const auto n = static_cast<Scalar>(gt.size());
  const long fg = gt.count();
  const Scalar mu_gt = fg / n;
  if (fg == 0) return 1 - pred.mean();
  if (fg == gt.size()) return pred.mean();

  const Plane<Scalar> inverted = 1 - pred;
  const Scalar object = mu_gt * detail::object_score(detail::masked_moments(pred, gt)) +
                        (1 - mu_gt) * detail::object_score(detail::masked_moments(inverted, BinMask(!gt)));

  Scalar row_sum = 0;
  Scalar col_sum = 0;
  for (Eigen::Index y = 0; y < gt.rows(); ++y) {
    for (Eigen::Index x = 0; x < gt.cols(); ++x) {
      if (!gt(y, x)) continue;
      row_sum += static_cast<Scalar>(y);
      col_sum += static_cast<Scalar>(x);
    }
  }
  const Eigen::Index cy = std::lround(row_sum / fg);
  const Eigen::Index cx = std::lround(col_sum / fg);
  const Plane<Scalar> truth = gt.template cast<Scalar>();

  Scalar region = 0;
  const std::array<std::array<Eigen::Index, 4>, 4> quads{{
      {0, 0, cy, cx},
      {0, cx, cy, gt.cols() - cx},
      {cy, 0, gt.rows() - cy, cx},
      {cy, cx, gt.rows() - cy, gt.cols() - cx},
  }};
  for (const auto& [r0, c0, rows, cols] : quads) {
    if (rows <= 0 || cols <= 0) continue;
    const long share = gt.block(r0, c0, rows, cols).count();
    if (share == 0) continue;
    const Plane<Scalar> px = pred.block(r0, c0, rows, cols);
    const Plane<Scalar> py = truth.block(r0, c0, rows, cols);
    region += static_cast<Scalar>(share) / fg * detail::quadrant_ssim(px, py);
  }
  return std::max<Scalar>(0, kStructureAlpha * object + (1 - kStructureAlpha) * region);
}

namespace detail {

// Normalised 7x7 Gaussian (sigma 5) applied separably with replicated borders.
template <typename Scalar>
Plane<Scalar> gaussian7_replicate(const Plane<Scalar>& src) {
  constexpr int kRadius = 3;
  constexpr double kSigma = 5.0;
  std::array<Scalar, 2 * kRadius + 1> k{};
  Scalar total = 0;
  for (int i = -kRadius; i <= kRadius; ++i) {
    k[i + kRadius] = static_cast<Scalar>(std::exp(-(i * i) / (2 * kSigma * kSigma)));
    total += k[i + kRadius];
  }
  for (auto& v : k) v /= total;

  const Eigen::Index h = src.rows();
  const Eigen::Index w = src.cols();
  Plane<Scalar> tmp(h, w);
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      Scalar acc = 0;
      for (int i = -kRadius; i <= kRadius; ++i) acc += k[i + kRadius] * src(y, std::clamp<Eigen::Index>(x + i, 0, w - 1));
      tmp(y, x) = acc;
    }
  }
  Plane<Scalar> out(h, w);
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      Scalar acc = 0;
      for (int i = -kRadius; i <= kRadius; ++i) acc += k[i + kRadius] * tmp(std::clamp<Eigen::Index>(y + i, 0, h - 1), x);
      out(y, x) = acc;
    }
  }
  return out;
}

}  // namespace detail

// Weighted F-measure (beta = 1): errors are propagated from the nearest
// foreground pixel into the background, smoothed, and background errors are
// up-weighted by 2 - exp(ln(0.5)/5 * distance).
template <typename Scalar>
Scalar weighted_fbeta(const Plane<Scalar>& pred, const BinMask& gt) {
  require_same_shape(pred, gt, "weighted_fbeta");
  if (!gt.any()) return pred.mean() > 0 ? Scalar(0) : Scalar(1);

  const Plane<Scalar> err = (pred - gt.template cast<Scalar>()).abs();
  const NearestForeground nearest = nearest_foreground(gt);

  Plane<Scalar> propagated = err;
  for (Eigen::Index y = 0; y < gt.rows(); ++y) {
    for (Eigen::Index x = 0; x < gt.cols(); ++x) {
      if (!gt(y, x)) propagated(y, x) = err(nearest.row(y, x), nearest.col(y, x));
    }
  }
  const Plane<Scalar> smoothed = detail::gaussian7_replicate(propagated);

  const Scalar decay = static_cast<Scalar>(std::log(0.5) / 5.0);
  Scalar fg_err = 0;
  Scalar bg_err = 0;
  for (Eigen::Index y = 0; y < gt.rows(); ++y) {
    for (Eigen::Index x = 0; x < gt.cols(); ++x) {
      if (gt(y, x)) {
        fg_err += std::min(err(y, x), smoothed(y, x));
      } else {
        const Scalar importance = 2 - std::exp(decay * static_cast<Scalar>(nearest.distance(y, x)));
        bg_err += err(y, x) * importance;
      }
    }
  }
  const auto fg = static_cast<Scalar>(gt.count());
  const Scalar recall = 1 - fg_err / fg;
  const Scalar tp = fg - fg_err;
  const Scalar precision = tp / (tp + bg_err + Scalar(kEps));
  return 2 * precision * recall / (precision + recall + Scalar(kEps));
}

template <typename Scalar>
Values<Scalar> evaluate_all(const Plane<Scalar>& pred, const BinMask& gt) {
  return {mae(pred, gt), adaptive_fbeta(pred, gt), e_measure_mean(pred, gt), s_measure(pred, gt),
          weighted_fbeta(pred, gt)};
}

}  // namespace argus::metrics

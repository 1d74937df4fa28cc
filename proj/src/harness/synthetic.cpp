#include "argus/harness/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "argus/codec.hpp"

namespace argus {
namespace fs = std::filesystem;

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

// Multi-octave value noise in [0, 1].
class ValueNoise {
public:
  ValueNoise(Rng& rng, int size, int octaves = 4) {
    for (int o = 0; o < octaves; ++o) {
      const int cells = 4 << o;
      Plane<double> lattice(cells + 1, cells + 1);
      for (Eigen::Index i = 0; i < lattice.size(); ++i) lattice.data()[i] = uniform(rng, 0.0, 1.0);
      layers_.push_back({lattice, static_cast<double>(cells) / size, std::pow(0.5, o)});
    }
    for (const auto& l : layers_) norm_ += l.weight;
  }

  double operator()(double x, double y) const {
    double v = 0;
    for (const auto& l : layers_) {
      const double gx = x * l.freq, gy = y * l.freq;
      const int ix = std::min(static_cast<int>(gx), static_cast<int>(l.lattice.cols()) - 2);
      const int iy = std::min(static_cast<int>(gy), static_cast<int>(l.lattice.rows()) - 2);
      const double fx = smooth(gx - ix), fy = smooth(gy - iy);
      const double top = l.lattice(iy, ix) * (1 - fx) + l.lattice(iy, ix + 1) * fx;
      const double bottom = l.lattice(iy + 1, ix) * (1 - fx) + l.lattice(iy + 1, ix + 1) * fx;
      v += l.weight * (top * (1 - fy) + bottom * fy);
    }
    return v / norm_;
  }

private:
  static double smooth(double t) { return t * t * (3 - 2 * t); }
  struct Layer {
    Plane<double> lattice;
    double freq;
    double weight;
  };
  std::vector<Layer> layers_;
  double norm_ = 0;
};

// Radius of a circle around the centre that contains the blob plus its ring.
double reach(const BlobSpec& b) { return std::max(b.rx, b.ry) + kSyntheticRing + 2; }

std::vector<BlobSpec> place_blobs(Rng& rng, int size) {
  const int want = std::uniform_int_distribution<int>(1, 3)(rng);
  std::vector<BlobSpec> blobs;
  for (int attempt = 0; attempt < 200 && static_cast<int>(blobs.size()) < want; ++attempt) {
    BlobSpec b;
    b.rx = uniform(rng, 0.07, 0.18) * size;
    b.ry = uniform(rng, 0.07, 0.18) * size;
    b.angle = uniform(rng, 0.0, std::numbers::pi);
    const double r = reach(b);
    if (2 * r >= size) continue;
    b.cx = uniform(rng, r, size - r);
    b.cy = uniform(rng, r, size - r);
    const bool clear = std::all_of(blobs.begin(), blobs.end(), [&](const BlobSpec& o) {
      return std::hypot(o.cx - b.cx, o.cy - b.cy) >= r + reach(o);
    });
    if (clear) blobs.push_back(b);
  }
  if (blobs.empty()) {  // tiny images: one centred blob
    const double r = std::max(1.0, size / 2.0 - kSyntheticRing - 2);
    blobs.push_back({size / 2.0, size / 2.0, r, r, 0.0});
  }
  return blobs;
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

}  // namespace

bool BlobSpec::contains(double x, double y) const {
  const double c = std::cos(angle), s = std::sin(angle);
  const double dx = x - cx, dy = y - cy;
  const double u = (dx * c + dy * s) / rx;
  const double v = (-dx * s + dy * c) / ry;
  return u * u + v * v <= 1.0;
}

long blob_union_area(const std::vector<BlobSpec>& blobs, int w, int h) {
  long area = 0;
  for (int y = 0; y < h; ++y) {
    std::vector<std::pair<long, long>> spans;  // inclusive pixel columns
    for (const auto& b : blobs) {
      const double c = std::cos(b.angle), s = std::sin(b.angle);
      const double dy = y + 0.5 - b.cy;
      const double ia = 1 / (b.rx * b.rx), ib = 1 / (b.ry * b.ry);
      const double A = c * c * ia + s * s * ib;
      const double B = 2 * dy * c * s * (ia - ib);
      const double C = dy * dy * (s * s * ia + c * c * ib) - 1;
      const double disc = B * B - 4 * A * C;
      if (disc < 0) continue;
      const double root = std::sqrt(disc);
      const double lo = b.cx + (-B - root) / (2 * A);
      const double hi = b.cx + (-B + root) / (2 * A);
      const long x0 = std::max(0L, static_cast<long>(std::ceil(lo - 0.5)));
      const long x1 = std::min(static_cast<long>(w) - 1, static_cast<long>(std::floor(hi - 0.5)));
      if (x0 <= x1) spans.emplace_back(x0, x1);
    }
    std::sort(spans.begin(), spans.end());
    long covered_to = -1;
    for (const auto& [a, b] : spans) {
      const long start = std::max(a, covered_to + 1);
      if (b >= start) area += b - start + 1;
      covered_to = std::max(covered_to, b);
    }
  }
  return area;
}

BinMask blob_ring(const BlobSpec& blob, const BinMask& gt, int ring) {
  BlobSpec outer = blob;
  outer.rx += ring;
  outer.ry += ring;
  BinMask out(gt.rows(), gt.cols());
  for (Eigen::Index y = 0; y < gt.rows(); ++y)
    for (Eigen::Index x = 0; x < gt.cols(); ++x)
      out(y, x) = !gt(y, x) && outer.contains(x + 0.5, y + 0.5) && !blob.contains(x + 0.5, y + 0.5);
  return out;
}

std::string synthetic_id(int index) { return fmt::format("synth_{:03d}", index); }

SyntheticScene make_scene(std::uint64_t seed, int index, int size) {
  if (size < 16) throw ConfigError("synthetic scenes need size >= 16");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  Rng rng(seq);

  SyntheticScene sc;
  sc.seed = seed;
  sc.index = index;
  sc.blobs = place_blobs(rng, size);

  sc.image = ImageRgb(size, size);
  std::array<double, 3> base;
  for (auto& b : base) b = uniform(rng, 90, 160);
  const ValueNoise bg_noise[3] = {ValueNoise(rng, size), ValueNoise(rng, size), ValueNoise(rng, size)};
  const ValueNoise depth_noise(rng, size, 2);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      for (int ch = 0; ch < 3; ++ch)
        sc.image.at(x, y)[ch] = to_byte(base[ch] + 80 * (bg_noise[ch](x + 0.5, y + 0.5) - 0.5));

  sc.gt = BinMask::Constant(size, size, false);
  for (const auto& b : sc.blobs)
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x)
        if (b.contains(x + 0.5, y + 0.5)) sc.gt(y, x) = true;

  sc.depth = DepthMap(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      sc.depth(y, x) = 0.15 + 0.35 * (y + 0.5) / size + 0.05 * depth_noise(x + 0.5, y + 0.5);

  // Each blob gets its own texture, shifted so its mean sits within a few
  // levels of the surrounding ring's mean.
  for (const auto& b : sc.blobs) {
    const BinMask ring = blob_ring(b, sc.gt);
    const ValueNoise tex[3] = {ValueNoise(rng, size, 3), ValueNoise(rng, size, 3), ValueNoise(rng, size, 3)};
    std::vector<std::pair<int, int>> pixels;
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x)
        if (b.contains(x + 0.5, y + 0.5)) pixels.emplace_back(x, y);
    for (int ch = 0; ch < 3; ++ch) {
      double ring_sum = 0;
      long ring_n = 0;
      for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
          if (ring(y, x)) {
            ring_sum += sc.image.at(x, y)[ch];
            ++ring_n;
          }
      const double ring_mean = ring_n ? ring_sum / ring_n : base[ch];
      const double shift = uniform(rng, -8, 8);
      double tex_mean = 0;
      for (const auto& [x, y] : pixels) tex_mean += tex[ch](x + 0.5, y + 0.5);
      tex_mean /= static_cast<double>(pixels.size());
      for (const auto& [x, y] : pixels)
        sc.image.at(x, y)[ch] = to_byte(ring_mean + shift + 50 * (tex[ch](x + 0.5, y + 0.5) - tex_mean));
    }
    const double c = std::cos(b.angle), s = std::sin(b.angle);
    for (const auto& [x, y] : pixels) {
      const double dx = x + 0.5 - b.cx, dy = y + 0.5 - b.cy;
      const double u = (dx * c + dy * s) / b.rx, v = (-dx * s + dy * c) / b.ry;
      sc.depth(y, x) = 0.75 + 0.2 * (1 - std::min(1.0, std::sqrt(u * u + v * v)));
    }
  }
  return sc;
}

nlohmann::json to_json(const BlobSpec& b) {
  return {{"cx", b.cx}, {"cy", b.cy}, {"rx", b.rx}, {"ry", b.ry}, {"angle", b.angle}};
}

void gen_synthetic(const fs::path& root, int n, std::uint64_t seed, int size) {
  if (n < 1) throw ConfigError("gen_synthetic needs n >= 1");
  for (const char* sub : {"images", "gt", "depth"}) fs::create_directories(root / sub);
  nlohmann::json scenes = nlohmann::json::array();
  for (int i = 0; i < n; ++i) {
    const SyntheticScene sc = make_scene(seed, i, size);
    const std::string id = synthetic_id(i);
    write_file(root / "images" / (id + ".png"), encode_png_rgb(sc.image));
    write_file(root / "gt" / (id + ".png"), encode_mask_png(sc.gt));
    write_file(root / "depth" / (id + ".png"), encode_depth_png(sc.depth));
    nlohmann::json blobs = nlohmann::json::array();
    for (const auto& b : sc.blobs) blobs.push_back(to_json(b));
    scenes.push_back({{"id", id}, {"blobs", blobs}, {"gt_area", blob_union_area(sc.blobs, size, size)}});
  }
  const nlohmann::json meta = {{"seed", seed}, {"size", size}, {"count", n}, {"scenes", scenes}};
  write_text(root / "scenes.json", meta.dump(2) + "\n");
}

}  // namespace argus

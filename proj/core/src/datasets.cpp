#include "asaukit/datasets.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <numbers>
#include <ostream>

#include "asaukit/error.hpp"
#include "asaukit/rng.hpp"

namespace asaukit {

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;
constexpr char kContainerMagic[] = "ASAUKIT-DATA v1\n";
constexpr std::size_t kContainerMagicLen = sizeof(kContainerMagic) - 1;

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t at) {
  return (std::uint32_t{bytes[at]} << 24) | (std::uint32_t{bytes[at + 1]} << 16) | (std::uint32_t{bytes[at + 2]} << 8) |
         std::uint32_t{bytes[at + 3]};
}

void put_le(std::ostream& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_le(std::istream& in, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw FormatError("data container: unexpected end of file");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

template <class Set>
Splits<Set> split_impl(const Set& set, const SplitSpec& spec) {
  spec.validate();
  const std::size_t n = set.size();
  if (n < 10) throw PreconditionError("split_dataset: need at least 10 items, got " + std::to_string(n));
  const auto sizes = split_sizes(n, spec);
  SplitMix64 rng(spec.seed);
  const auto perm = permutation(n, rng);
  const std::span<const std::size_t> all(perm);
  return {set.subset(all.subspan(0, sizes[0])), set.subset(all.subspan(sizes[0], sizes[1])),
          set.subset(all.subspan(sizes[0] + sizes[1], sizes[2]))};
}

const Tensor& require_array(const std::vector<NamedArray>& arrays, const std::string& name) {
  for (const auto& a : arrays) {
    if (a.name == name) return a.values;
  }
  throw FormatError("data container: missing array '" + name + "'");
}

void write_container_file(const std::string& path, std::span<const NamedArray> arrays) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_data_container(out, arrays);
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<NamedArray> read_container_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_data_container(in);
}

}  // namespace

LabeledSet LabeledSet::subset(std::span<const std::size_t> rows) const {
  LabeledSet out;
  out.features = features.gather_rows(rows);
  out.labels.reserve(rows.size());
  for (auto r : rows) out.labels.push_back(labels.at(r));
  out.k = k;
  return out;
}

void LabeledSet::validate() const {
  if (k < 1) throw PreconditionError("labeled set: class count must be positive");
  if (features.empty() || features.dim(0) != labels.size()) {
    throw ShapeError("labeled set: feature rows do not match label count");
  }
  for (int l : labels) {
    if (l < 0 || l >= k) throw PreconditionError("labeled set: label " + std::to_string(l) + " outside [0, k)");
  }
}

MaskSet MaskSet::subset(std::span<const std::size_t> rows) const {
  return {images.gather_rows(rows), masks.gather_rows(rows)};
}

void MaskSet::validate() const {
  if (images.shape() != masks.shape() || images.rank() != 4 || images.dim(1) != 1) {
    throw ShapeError("mask set: images and masks must both be [N x 1 x H x W]");
  }
  for (double m : masks.data()) {
    if (m != 0.0 && m != 1.0) throw PreconditionError("mask set: masks must be binary");
  }
}

void SplitSpec::validate() const {
  double sum = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw PreconditionError("split fractions must be positive");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw PreconditionError("split fractions must sum to 1");
}

LabeledSet gen_two_moons(std::size_t n, double noise_sd, std::uint64_t seed) {
  if (n == 0 || n % 2 != 0) throw PreconditionError("gen_two_moons: n must be positive and even, got " + std::to_string(n));
  if (!(noise_sd >= 0.0)) throw PreconditionError("gen_two_moons: noise_sd must be >= 0");
  const std::size_t half = n / 2;
  SplitMix64 rng(seed);
  LabeledSet set;
  set.k = 2;
  set.features = Tensor({n, 2});
  set.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i / 2;
    const int label = static_cast<int>(i % 2);
    const double t = half == 1 ? 0.0 : std::numbers::pi * static_cast<double>(j) / static_cast<double>(half - 1);
    double x = label == 0 ? std::cos(t) : 1.0 - std::cos(t);
    double y = label == 0 ? std::sin(t) : 0.5 - std::sin(t);
    const double nx = rng.normal();
    const double ny = rng.normal();
    if (noise_sd > 0.0) {
      x += noise_sd * nx;
      y += noise_sd * ny;
    }
    set.features[2 * i] = x;
    set.features[2 * i + 1] = y;
    set.labels[i] = label;
  }
  return set;
}

LabeledSet gen_blobs(std::size_t n, int k, double spread, std::uint64_t seed, std::size_t dim) {
  if (k < 2) throw PreconditionError("gen_blobs: k must be >= 2");
  if (n < static_cast<std::size_t>(k)) throw PreconditionError("gen_blobs: n must be >= k");
  if (!(spread >= 0.0)) throw PreconditionError("gen_blobs: spread must be >= 0");
  if (dim == 0) throw PreconditionError("gen_blobs: dim must be positive");

  SplitMix64 rng(seed);
  constexpr double kMinSeparation = 2.0;
  std::vector<std::vector<double>> centers;
  for (int c = 0; c < k; ++c) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 10000) throw PreconditionError("gen_blobs: cannot place " + std::to_string(k) + " separated centres");
      std::vector<double> cand(dim);
      for (double& v : cand) v = rng.uniform(-10.0, 10.0);
      const bool ok = std::all_of(centers.begin(), centers.end(), [&](const std::vector<double>& other) {
        double d2 = 0.0;
        for (std::size_t d = 0; d < dim; ++d) d2 += (cand[d] - other[d]) * (cand[d] - other[d]);
        return d2 >= kMinSeparation * kMinSeparation;
      });
      if (ok) {
        centers.push_back(std::move(cand));
        break;
      }
    }
  }

  LabeledSet set;
  set.k = k;
  set.features = Tensor({n, dim});
  set.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % static_cast<std::size_t>(k));
    for (std::size_t d = 0; d < dim; ++d) set.features[i * dim + d] = centers[label][d] + spread * rng.normal();
    set.labels[i] = label;
  }
  return set;
}

MaskSet gen_shapes_seg(std::size_t n, std::size_t h, std::size_t w, std::uint64_t seed) {
  if (n == 0) throw PreconditionError("gen_shapes_seg: n must be positive");
  if (h < 16 || w < 16 || h % 2 != 0 || w % 2 != 0) {
    throw PreconditionError("gen_shapes_seg: h and w must be even and >= 16");
  }
  constexpr double kMinFraction = 0.05;
  constexpr double kMaxFraction = 0.6;
  constexpr double kNoiseSd = 0.05;

  SplitMix64 rng(seed);
  MaskSet set{Tensor({n, 1, h, w}), Tensor({n, 1, h, w})};
  const double hd = static_cast<double>(h);
  const double wd = static_cast<double>(w);
  std::vector<double> mask(h * w);
  for (std::size_t s = 0; s < n; ++s) {
    while (true) {
      const bool ellipse = rng.uniform() < 0.5;
      const double cy = rng.uniform(0.2 * hd, 0.8 * hd);
      const double cx = rng.uniform(0.2 * wd, 0.8 * wd);
      const double ry = rng.uniform(0.1 * hd, 0.4 * hd);
      const double rx = rng.uniform(0.1 * wd, 0.4 * wd);
      std::size_t fg = 0;
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
          const double dy = (static_cast<double>(y) + 0.5 - cy) / ry;
          const double dx = (static_cast<double>(x) + 0.5 - cx) / rx;
          const bool inside = ellipse ? dy * dy + dx * dx <= 1.0 : std::abs(dy) <= 1.0 && std::abs(dx) <= 1.0;
          mask[y * w + x] = inside ? 1.0 : 0.0;
          fg += inside ? 1 : 0;
        }
      }
      const double frac = static_cast<double>(fg) / static_cast<double>(h * w);
      if (frac >= kMinFraction && frac <= kMaxFraction) break;
    }
    const double background = rng.uniform(0.0, 0.3);
    const double foreground = rng.uniform(0.55, 0.95);
    for (std::size_t i = 0; i < h * w; ++i) {
      const double level = mask[i] > 0.0 ? foreground : background;
      set.images[s * h * w + i] = std::clamp(level + kNoiseSd * rng.normal(), 0.0, 1.0);
      set.masks[s * h * w + i] = mask[i];
    }
  }
  return set;
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  const double nd = static_cast<double>(n);
  const auto train = static_cast<std::size_t>(std::floor(spec.fractions[0] * nd + 1e-9));
  const auto val = static_cast<std::size_t>(std::floor(spec.fractions[1] * nd + 1e-9));
  if (train + val > n) throw PreconditionError("split fractions exceed the set size");
  return {train, val, n - train - val};
}

Splits<LabeledSet> split_dataset(const LabeledSet& set, const SplitSpec& spec) { return split_impl(set, spec); }

Splits<MaskSet> split_dataset(const MaskSet& set, const SplitSpec& spec) { return split_impl(set, spec); }

LabeledSet load_idx(const std::string& images_path, const std::string& labels_path) {
  const auto images = read_file(images_path);
  const auto labels = read_file(labels_path);

  if (images.size() < 4) throw IdxError(IdxError::Kind::truncated, "IDX images: file shorter than its magic number");
  if (read_be32(images, 0) != kIdxImagesMagic) {
    throw IdxError(IdxError::Kind::bad_magic, "IDX images: expected magic 0x00000803");
  }
  if (images.size() < 16) throw IdxError(IdxError::Kind::truncated, "IDX images: header truncated");
  const std::size_t n = read_be32(images, 4);
  const std::size_t rows = read_be32(images, 8);
  const std::size_t cols = read_be32(images, 12);
  if (images.size() < 16 + n * rows * cols) {
    throw IdxError(IdxError::Kind::truncated, "IDX images: header promises " + std::to_string(n * rows * cols) +
                                                  " pixel bytes, file has " + std::to_string(images.size() - 16));
  }

  if (labels.size() < 4) throw IdxError(IdxError::Kind::truncated, "IDX labels: file shorter than its magic number");
  if (read_be32(labels, 0) != kIdxLabelsMagic) {
    throw IdxError(IdxError::Kind::bad_magic, "IDX labels: expected magic 0x00000801");
  }
  if (labels.size() < 8) throw IdxError(IdxError::Kind::truncated, "IDX labels: header truncated");
  const std::size_t nl = read_be32(labels, 4);
  if (labels.size() < 8 + nl) throw IdxError(IdxError::Kind::truncated, "IDX labels: fewer label bytes than promised");
  if (nl != n) {
    throw IdxError(IdxError::Kind::count_mismatch,
                   "IDX: " + std::to_string(n) + " images but " + std::to_string(nl) + " labels");
  }
  if (n == 0 || rows == 0 || cols == 0) throw IdxError(IdxError::Kind::truncated, "IDX images: empty image set");

  LabeledSet set;
  set.features = Tensor({n, 1, rows, cols});
  for (std::size_t i = 0; i < n * rows * cols; ++i) set.features[i] = images[16 + i] / 255.0;
  set.labels.resize(n);
  int max_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    set.labels[i] = labels[8 + i];
    max_label = std::max(max_label, set.labels[i]);
  }
  set.k = max_label + 1;
  return set;
}

void write_data_container(std::ostream& out, std::span<const NamedArray> arrays) {
  out.write(kContainerMagic, static_cast<std::streamsize>(kContainerMagicLen));
  put_le(out, arrays.size(), 4);
  for (const auto& a : arrays) {
    put_le(out, a.name.size(), 4);
    out.write(a.name.data(), static_cast<std::streamsize>(a.name.size()));
    put_le(out, a.values.rank(), 4);
    for (auto d : a.values.shape()) put_le(out, d, 8);
    for (double v : a.values.data()) put_le(out, std::bit_cast<std::uint64_t>(v), 8);
  }
}

std::vector<NamedArray> read_data_container(std::istream& in) {
  char magic[kContainerMagicLen];
  if (!in.read(magic, static_cast<std::streamsize>(kContainerMagicLen)) ||
      std::string_view(magic, kContainerMagicLen) != std::string_view(kContainerMagic, kContainerMagicLen)) {
    throw FormatError("data container: bad magic");
  }
  const auto count = get_le(in, 4);
  std::vector<NamedArray> arrays;
  for (std::uint64_t i = 0; i < count; ++i) {
    NamedArray a;
    a.name.resize(get_le(in, 4));
    if (!in.read(a.name.data(), static_cast<std::streamsize>(a.name.size()))) {
      throw FormatError("data container: truncated array name");
    }
    const auto rank = get_le(in, 4);
    if (rank == 0 || rank > 8) throw FormatError("data container: bad rank for '" + a.name + "'");
    Shape shape(rank);
    for (auto& d : shape) d = get_le(in, 8);
    std::vector<double> data(shape_volume(shape));
    for (double& v : data) v = std::bit_cast<double>(get_le(in, 8));
    a.values = Tensor(std::move(shape), std::move(data));
    arrays.push_back(std::move(a));
  }
  return arrays;
}

void save_dataset(const std::string& path, const LabeledSet& set) {
  std::vector<double> labels(set.labels.begin(), set.labels.end());
  const NamedArray arrays[] = {{"features", set.features},
                               {"labels", Tensor({set.labels.size()}, std::move(labels))},
                               {"k", Tensor({1}, std::vector<double>{static_cast<double>(set.k)})}};
  write_container_file(path, arrays);
}

void save_dataset(const std::string& path, const MaskSet& set) {
  const NamedArray arrays[] = {{"images", set.images}, {"masks", set.masks}};
  write_container_file(path, arrays);
}

LabeledSet load_labeled_set(const std::string& path) {
  const auto arrays = read_container_file(path);
  LabeledSet set;
  set.features = require_array(arrays, "features");
  for (double v : require_array(arrays, "labels").data()) set.labels.push_back(static_cast<int>(v));
  set.k = static_cast<int>(require_array(arrays, "k")[0]);
  set.validate();
  return set;
}

MaskSet load_mask_set(const std::string& path) {
  const auto arrays = read_container_file(path);
  MaskSet set{require_array(arrays, "images"), require_array(arrays, "masks")};
  set.validate();
  return set;
}

}  // namespace asaukit

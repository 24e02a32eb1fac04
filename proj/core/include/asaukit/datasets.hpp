#pragma once

// Seeded synthetic datasets, the 80/10/10 splitter, the IDX reader and the
// ASAUKIT-DATA binary container.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "asaukit/tensor.hpp"

namespace asaukit {

/// features: [N x D] or [N x C x H x W]; labels in [0, k).
struct LabeledSet {
  Tensor features;
  std::vector<int> labels;
  int k = 0;

  std::size_t size() const noexcept { return labels.size(); }
  LabeledSet subset(std::span<const std::size_t> rows) const;
  /// Checks label range and feature/label count agreement.
  void validate() const;
};

/// images and masks: [N x 1 x H x W]; masks hold only 0 and 1.
struct MaskSet {
  Tensor images;
  Tensor masks;

  std::size_t size() const noexcept { return images.empty() ? 0 : images.dim(0); }
  MaskSet subset(std::span<const std::size_t> rows) const;
  void validate() const;
};

struct SplitSpec {
  std::array<double, 3> fractions{0.8, 0.1, 0.1};
  std::uint64_t seed = 0;

  void validate() const;
};

template <class Set>
struct Splits {
  Set train;
  Set val;
  Set test;
};

/// Two interleaved half circles, n/2 points each, on a linspace of angles plus
/// Gaussian jitter. Class 0 sits on the upper unit half circle.
LabeledSet gen_two_moons(std::size_t n, double noise_sd, std::uint64_t seed);

/// k isotropic Gaussian clusters around seeded centres in [-10, 10]^dim that are
/// at least 2 apart. Sample i has label i % k.
LabeledSet gen_blobs(std::size_t n, int k, double spread, std::uint64_t seed, std::size_t dim = 2);

/// One ellipse or rectangle per image on a noisy background; the foreground
/// fraction of every mask lies in [0.05, 0.6].
MaskSet gen_shapes_seg(std::size_t n, std::size_t h, std::size_t w, std::uint64_t seed);

/// floor(f0 * n) train, floor(f1 * n) validation, the remainder test.
std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitSpec& spec);

/// Seeded permutation followed by contiguous slicing. Requires at least 10 items.
Splits<LabeledSet> split_dataset(const LabeledSet& set, const SplitSpec& spec);
Splits<MaskSet> split_dataset(const MaskSet& set, const SplitSpec& spec);

/// Reads an IDX image file (magic 0x00000803) and label file (0x00000801).
/// Pixels are scaled to [0, 1]; features are [N x 1 x rows x cols].
LabeledSet load_idx(const std::string& images_path, const std::string& labels_path);

struct NamedArray {
  std::string name;
  Tensor values;
};

/// Binary container: the 16 bytes "ASAUKIT-DATA v1\n", u32 array count, then per
/// array u32 name length, name bytes, u32 rank, u64 dims, f64 values. All
/// integers and floats are little-endian.
void write_data_container(std::ostream& out, std::span<const NamedArray> arrays);
std::vector<NamedArray> read_data_container(std::istream& in);

/// Arrays "features", "labels", "k".
void save_dataset(const std::string& path, const LabeledSet& set);
/// Arrays "images", "masks".
void save_dataset(const std::string& path, const MaskSet& set);
LabeledSet load_labeled_set(const std::string& path);
MaskSet load_mask_set(const std::string& path);

}  // namespace asaukit

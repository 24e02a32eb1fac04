#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace asaukit {

/// Contiguous run of scalars registered under one name (e.g. a weight matrix).
struct ParamBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
  bool trainable = true;
  double lower_bound = -std::numeric_limits<double>::infinity();
};

/// Flat registry of every scalar a network owns, with a gradient slot per
/// scalar. Scalar i of a block named "w" with more than one entry is named
/// "w[i]"; single-entry blocks carry the bare block name.
class ParamStore {
 public:
  /// Registers `size` scalars initialised to `init`; block names must be unique.
  std::size_t add_block(std::string name, std::size_t size, bool trainable, double init = 0.0,
                        double lower_bound = -std::numeric_limits<double>::infinity());

  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<ParamBlock>& blocks() const noexcept { return blocks_; }
  const ParamBlock& block_of(std::size_t index) const;
  std::optional<ParamBlock> find_block(std::string_view name) const;

  std::string name(std::size_t index) const;
  std::optional<std::size_t> find(std::string_view scalar_name) const;
  bool trainable(std::size_t index) const { return block_of(index).trainable; }

  std::span<const double> values() const noexcept { return values_; }
  /// Mutable access invalidates outstanding forward caches.
  std::span<double> mutable_values() noexcept {
    ++version_;
    return values_;
  }
  void set_value(std::size_t index, double v) {
    ++version_;
    values_.at(index) = v;
  }

  std::span<const double> grads() const noexcept { return grads_; }
  std::span<double> grads() noexcept { return grads_; }
  void zero_grads() noexcept;

  /// Raises every value below its block's lower bound to that bound.
  void clamp_to_bounds() noexcept;

  /// Bumped on every mutable access to values.
  std::uint64_t version() const noexcept { return version_; }

 private:
  std::vector<ParamBlock> blocks_;
  std::vector<double> values_;
  std::vector<double> grads_;
  std::uint64_t version_ = 0;
};

}  // namespace asaukit

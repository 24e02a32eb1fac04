#include "asaukit/param_store.hpp"

#include <algorithm>
#include <charconv>

#include "asaukit/error.hpp"

namespace asaukit {

std::size_t ParamStore::add_block(std::string name, std::size_t size, bool trainable, double init,
                                  double lower_bound) {
  if (size == 0) throw PreconditionError("parameter block '" + name + "' is empty");
  if (find_block(name)) throw PreconditionError("duplicate parameter block '" + name + "'");
  const std::size_t offset = values_.size();
  blocks_.push_back({std::move(name), offset, size, trainable, lower_bound});
  values_.resize(offset + size, init);
  grads_.resize(offset + size, 0.0);
  ++version_;
  return offset;
}

const ParamBlock& ParamStore::block_of(std::size_t index) const {
  if (index >= values_.size()) throw PreconditionError("parameter index out of range");
  auto it = std::upper_bound(blocks_.begin(), blocks_.end(), index,
                             [](std::size_t i, const ParamBlock& b) { return i < b.offset; });
  return *std::prev(it);
}

std::optional<ParamBlock> ParamStore::find_block(std::string_view name) const {
  for (const auto& b : blocks_) {
    if (b.name == name) return b;
  }
  return std::nullopt;
}

std::string ParamStore::name(std::size_t index) const {
  const auto& b = block_of(index);
  if (b.size == 1) return b.name;
  return b.name + "[" + std::to_string(index - b.offset) + "]";
}

std::optional<std::size_t> ParamStore::find(std::string_view scalar_name) const {
  if (auto b = find_block(scalar_name); b && b->size == 1) return b->offset;
  const auto open = scalar_name.rfind('[');
  if (open == std::string_view::npos || !scalar_name.ends_with("]")) return std::nullopt;
  auto b = find_block(scalar_name.substr(0, open));
  if (!b || b->size == 1) return std::nullopt;
  const auto digits = scalar_name.substr(open + 1, scalar_name.size() - open - 2);
  std::size_t local = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), local);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || local >= b->size) return std::nullopt;
  return b->offset + local;
}

void ParamStore::zero_grads() noexcept { std::fill(grads_.begin(), grads_.end(), 0.0); }

void ParamStore::clamp_to_bounds() noexcept {
  bool changed = false;
  for (const auto& b : blocks_) {
    for (std::size_t i = b.offset; i < b.offset + b.size; ++i) {
      if (values_[i] < b.lower_bound) {
        values_[i] = b.lower_bound;
        changed = true;
      }
    }
  }
  if (changed) ++version_;
}

}  // namespace asaukit

#include <fstream>
#include <istream>
#include <ostream>

#include "asaukit/approximation.hpp"
#include "asaukit/error.hpp"
#include "asaukit/network.hpp"

namespace asaukit {

namespace {

constexpr const char* kMagic = "ASAUKIT-CKPT v1";
constexpr const char* kStructure = "structure ";
constexpr const char* kParams = "params ";

}  // namespace

void save_checkpoint(std::ostream& out, const Network& network) {
  const auto& store = network.params();
  out << kMagic << '\n';
  out << kStructure << network.describe() << '\n';
  out << kParams << store.size() << '\n';
  for (std::size_t i = 0; i < store.size(); ++i) out << store.name(i) << ' ' << format_real(store.values()[i]) << '\n';
}

void load_checkpoint(std::istream& in, Network& network) {
  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw FormatError("checkpoint: missing magic line '" + std::string(kMagic) + "'");
  if (!std::getline(in, line) || !line.starts_with(kStructure)) throw FormatError("checkpoint: missing structure line");
  const std::string structure = line.substr(std::string(kStructure).size());
  if (structure != network.describe()) {
    throw FormatError("checkpoint: structure '" + structure + "' does not match network '" + network.describe() + "'");
  }
  if (!std::getline(in, line) || !line.starts_with(kParams)) throw FormatError("checkpoint: missing params line");
  std::size_t count = 0;
  try {
    count = std::stoull(line.substr(std::string(kParams).size()));
  } catch (const std::exception&) {
    throw FormatError("checkpoint: bad parameter count");
  }
  auto& store = network.params();
  if (count != store.size()) {
    throw FormatError("checkpoint: holds " + std::to_string(count) + " parameters, network has " +
                      std::to_string(store.size()));
  }

  std::vector<double> values(store.values().begin(), store.values().end());
  std::vector<bool> seen(store.size(), false);
  for (std::size_t k = 0; k < count; ++k) {
    if (!std::getline(in, line)) throw FormatError("checkpoint: truncated after " + std::to_string(k) + " parameters");
    const auto sp = line.rfind(' ');
    if (sp == std::string::npos) throw FormatError("checkpoint: malformed line '" + line + "'");
    const std::string name = line.substr(0, sp);
    const auto idx = store.find(name);
    if (!idx) throw FormatError("checkpoint: unknown parameter '" + name + "'");
    if (seen[*idx]) throw FormatError("checkpoint: duplicate parameter '" + name + "'");
    const std::string text = line.substr(sp + 1);
    char* end = nullptr;
    values[*idx] = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size()) throw FormatError("checkpoint: bad value for '" + name + "'");
    seen[*idx] = true;
  }
  auto dst = store.mutable_values();
  std::copy(values.begin(), values.end(), dst.begin());
}

void save_checkpoint(const std::string& path, const Network& network) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  save_checkpoint(out, network);
  if (!out) throw IoError("failed writing '" + path + "'");
}

void load_checkpoint(const std::string& path, Network& network) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  load_checkpoint(in, network);
}

}  // namespace asaukit

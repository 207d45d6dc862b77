// SPDX-License-Identifier: Apache-2.0

#include "dpp/nn/container.hpp"

#include <bit>
#include <cstring>

#include "dpp/common/errors.hpp"
#include "dpp/common/hash.hpp"
#include "dpp/common/io.hpp"

namespace dpp::nn {
namespace {

constexpr char kMagic[8] = {'D', 'P', 'P', 'C', 'K', 'P', 'T', '\0'};

void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}

  std::uint64_t le(int bytes) {
    need(static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(bytes);
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string out = s_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  bool done() const { return pos_ == s_.size(); }

 private:
  void need(std::size_t n) const {
    if (s_.size() - pos_ < n) throw IoError("checkpoint: truncated at byte " + std::to_string(pos_));
  }
  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_container(const std::string& config, const ParamStore& store) {
  std::string out(kMagic, sizeof kMagic);
  put_le(out, kContainerVersion, 4);
  put_le(out, fnv1a64(config), 8);
  put_le(out, config.size(), 4);
  out += config;
  put_le(out, store.size(), 4);
  for (std::size_t i = 0; i < store.size(); ++i) {
    const Tensor& t = store.tensor(i);
    put_le(out, store.name(i).size(), 4);
    out += store.name(i);
    put_le(out, t.requires_grad ? 1 : 0, 1);
    put_le(out, static_cast<std::uint64_t>(t.value.rows()), 4);
    put_le(out, static_cast<std::uint64_t>(t.value.cols()), 4);
    for (Index j = 0; j < t.value.size(); ++j) put_le(out, std::bit_cast<std::uint64_t>(t.value.data()[j]), 8);
  }
  return out;
}

Container decode_container(const std::string& bytes) {
  Reader r(bytes);
  if (r.bytes(sizeof kMagic) != std::string(kMagic, sizeof kMagic)) throw IoError("checkpoint: bad magic");
  const auto version = r.le(4);
  if (version != kContainerVersion)
    throw IoError("checkpoint: unsupported format version " + std::to_string(version));
  Container c;
  c.config_hash = r.le(8);
  c.config = r.bytes(r.le(4));
  if (fnv1a64(c.config) != c.config_hash) throw IoError("checkpoint: config hash does not match config bytes");
  const auto n = r.le(4);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string name = r.bytes(r.le(4));
    const auto flag = r.le(1);
    if (flag > 1) throw IoError("checkpoint: bad trainable flag for " + name);
    const auto rows = static_cast<Index>(r.le(4));
    const auto cols = static_cast<Index>(r.le(4));
    Matrix m(rows, cols);
    for (Index j = 0; j < m.size(); ++j) m.data()[j] = std::bit_cast<double>(r.le(8));
    if (c.store.contains(name)) throw IoError("checkpoint: duplicate tensor " + name);
    c.store.add(name, std::move(m), flag == 1);
  }
  if (!r.done()) throw IoError("checkpoint: trailing bytes");
  return c;
}

void save_container(const std::string& path, const std::string& config, const ParamStore& store) {
  write_text_file(path, encode_container(config, store));
}

Container load_container(const std::string& path) { return decode_container(read_text_file(path)); }

}  // namespace dpp::nn

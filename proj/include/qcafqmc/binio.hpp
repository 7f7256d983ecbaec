/*
 * Copyright 2026 The qcafqmc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Little-endian binary helpers shared by the archive and checkpoint formats.

#pragma once

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "qcafqmc/common.hpp"

namespace qcafqmc::binio {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

class Writer {
 public:
  template <typename T>
    requires std::is_arithmetic_v<T>
  void put(T v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }
  void put(complex_t z) {
    put(z.real());
    put(z.imag());
  }
  void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  void str(const std::string& s) {
    put<std::uint64_t>(s.size());
    bytes(s);
  }
  void matrix(const RMatrix& m) {
    put<std::uint64_t>(m.rows());
    put<std::uint64_t>(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) put(m(i, j));
  }
  void matrix(const CMatrix& m) {
    put<std::uint64_t>(m.rows());
    put<std::uint64_t>(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) put(m(i, j));
  }
  const std::vector<char>& data() const { return buf_; }

  /// Writes to `path` via a temporary sibling and an atomic rename.
  void commit(const std::filesystem::path& path) const {
    auto tmp = path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw ArchiveError("cannot open " + tmp.string() + " for writing");
      out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
      if (!out) throw ArchiveError("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
  }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInputError("cannot open " + path.string());
    buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  explicit Reader(std::vector<char> data) : buf_(std::move(data)) {}

  template <typename T>
    requires std::is_arithmetic_v<T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  complex_t get_complex() {
    double re = get<double>();
    double im = get<double>();
    return {re, im};
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s(buf_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  std::string str() { return bytes(get<std::uint64_t>()); }
  RMatrix rmatrix() {
    auto r = get<std::uint64_t>();
    auto c = get<std::uint64_t>();
    need(r * c * sizeof(double));
    RMatrix m(r, c);
    for (std::uint64_t j = 0; j < c; ++j)
      for (std::uint64_t i = 0; i < r; ++i) m(i, j) = get<double>();
    return m;
  }
  CMatrix cmatrix() {
    auto r = get<std::uint64_t>();
    auto c = get<std::uint64_t>();
    need(r * c * 2 * sizeof(double));
    CMatrix m(r, c);
    for (std::uint64_t j = 0; j < c; ++j)
      for (std::uint64_t i = 0; i < r; ++i) m(i, j) = get_complex();
    return m;
  }
  bool at_end() const { return pos_ == buf_.size(); }
  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > buf_.size()) throw ArchiveError("truncated binary file");
  }
  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

/// 64-bit FNV-1a.
class Fnv1a {
 public:
  void update(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  template <typename T>
    requires std::is_arithmetic_v<T>
  void update(T v) {
    update(&v, sizeof(T));
  }
  std::uint64_t digest() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace qcafqmc::binio

// Copyright 2026 The wordpros Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Little-endian scalar and matrix I/O for the binary file formats.

#ifndef WORDPROS_BINIO_H_
#define WORDPROS_BINIO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>

#include "wordpros/tensor.h"

namespace wordpros::binio {

class TruncatedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename T>
T to_little(T v) {
  static_assert(std::is_arithmetic_v<T>);
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <typename T>
void write(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read(std::istream& in) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw TruncatedError("unexpected end of file");
  return to_little(v);
}

template <typename Scalar, int Options>
void write_matrix(std::ostream& out,
                  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Options>& m) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(m.size() * sizeof(Scalar)));
  } else {
    for (Index i = 0; i < m.size(); ++i) write(out, m.data()[i]);
  }
}

/// Reads into `m`, which must already have its final shape.
template <typename Scalar, int Options>
void read_matrix(std::istream& in, Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Options>& m) {
  const auto bytes = static_cast<std::streamsize>(m.size() * sizeof(Scalar));
  if (!in.read(reinterpret_cast<char*>(m.data()), bytes)) {
    throw TruncatedError("unexpected end of file");
  }
  if constexpr (std::endian::native != std::endian::little) {
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = to_little(m.data()[i]);
  }
}

}  // namespace wordpros::binio

#endif  // WORDPROS_BINIO_H_

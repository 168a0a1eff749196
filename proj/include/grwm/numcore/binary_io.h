// Copyright 2026 The GRWM Authors
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

#ifndef GRWM_NUMCORE_BINARY_IO_H_
#define GRWM_NUMCORE_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "grwm/common/errors.h"

namespace grwm::numcore {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

// Append-only little-endian encoder.
class ByteWriter {
 public:
  template <typename U>
  void Put(U v) {
    const size_t at = bytes_.size();
    bytes_.resize(at + sizeof(U));
    std::memcpy(bytes_.data() + at, &v, sizeof(U));
  }
  void PutBytes(const void* data, size_t n) {
    const size_t at = bytes_.size();
    bytes_.resize(at + n);
    if (n) std::memcpy(bytes_.data() + at, data, n);
  }
  std::vector<uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<uint8_t> bytes_;
};

// Bounds-checked decoder; running past the end raises a truncation error.
class ByteReader {
 public:
  explicit ByteReader(const std::vector<uint8_t>& bytes) : bytes_(bytes) {}

  template <typename U>
  U Get() {
    U v;
    GetBytes(&v, sizeof(U));
    return v;
  }
  void GetBytes(void* out, size_t n) {
    if (n > bytes_.size() - pos_) {
      throw FormatError(FormatErrorKind::kTruncated,
                        "need " + std::to_string(n) + " bytes at offset " +
                            std::to_string(pos_) + ", file has " +
                            std::to_string(bytes_.size()));
    }
    if (n) std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }
  size_t remaining() const { return bytes_.size() - pos_; }
  size_t position() const { return pos_; }

 private:
  const std::vector<uint8_t>& bytes_;
  size_t pos_ = 0;
};

}  // namespace grwm::numcore

#endif  // GRWM_NUMCORE_BINARY_IO_H_

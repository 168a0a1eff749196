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

#include "grwm/numcore/checkpoint.h"

#include <fstream>
#include <iterator>

#include "grwm/numcore/binary_io.h"

namespace grwm::numcore {

std::vector<uint8_t> EncodeCheckpoint(const std::vector<NamedArray>& arrays) {
  ByteWriter w;
  w.PutBytes(kCheckpointMagic, 4);
  w.Put<uint32_t>(kCheckpointVersion);
  w.Put<uint32_t>(static_cast<uint32_t>(arrays.size()));
  for (const NamedArray& a : arrays) {
    GRWM_REQUIRE(NumElements(a.shape) == static_cast<int64_t>(a.values.size()),
                 "array " + a.name + " has inconsistent shape");
    w.Put<uint32_t>(static_cast<uint32_t>(a.name.size()));
    w.PutBytes(a.name.data(), a.name.size());
    w.Put<uint32_t>(static_cast<uint32_t>(a.shape.size()));
    for (int64_t e : a.shape) w.Put<uint64_t>(static_cast<uint64_t>(e));
    w.PutBytes(a.values.data(), a.values.size() * sizeof(float));
  }
  return std::move(w.bytes());
}

std::vector<NamedArray> DecodeCheckpoint(const std::vector<uint8_t>& bytes) {
  ByteReader r(bytes);
  char magic[4];
  r.GetBytes(magic, 4);
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw FormatError(FormatErrorKind::kBadMagic, "not a GRWM checkpoint");
  }
  const uint32_t version = r.Get<uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError(FormatErrorKind::kBadVersion,
                      "checkpoint version " + std::to_string(version));
  }
  const uint32_t count = r.Get<uint32_t>();
  std::vector<NamedArray> out;
  for (uint32_t i = 0; i < count; ++i) {
    NamedArray a;
    const uint32_t name_len = r.Get<uint32_t>();
    if (name_len > r.remaining()) {
      throw FormatError(FormatErrorKind::kTruncated, "array name");
    }
    a.name.resize(name_len);
    r.GetBytes(a.name.data(), name_len);
    const uint32_t rank = r.Get<uint32_t>();
    if (uint64_t(rank) * 8 > r.remaining()) {
      throw FormatError(FormatErrorKind::kTruncated, "array extents");
    }
    uint64_t n = 1;
    for (uint32_t d = 0; d < rank; ++d) {
      const uint64_t e = r.Get<uint64_t>();
      a.shape.push_back(static_cast<int64_t>(e));
      n *= e;
    }
    if (n * sizeof(float) > r.remaining()) {
      throw FormatError(FormatErrorKind::kTruncated, "array " + a.name);
    }
    a.values.resize(n);
    r.GetBytes(a.values.data(), n * sizeof(float));
    out.push_back(std::move(a));
  }
  if (r.remaining() != 0) {
    throw FormatError(FormatErrorKind::kMalformed, "trailing bytes");
  }
  return out;
}

std::vector<uint8_t> ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatErrorKind::kIo, "cannot open " + path);
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void WriteFileBytes(const std::string& path,
                    const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(FormatErrorKind::kIo, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(FormatErrorKind::kIo, "write failed: " + path);
}

void WriteCheckpoint(const std::string& path,
                     const std::vector<NamedArray>& arrays) {
  WriteFileBytes(path, EncodeCheckpoint(arrays));
}

std::vector<NamedArray> ReadCheckpoint(const std::string& path) {
  return DecodeCheckpoint(ReadFileBytes(path));
}

}  // namespace grwm::numcore

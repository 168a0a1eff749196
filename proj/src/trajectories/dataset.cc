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

#include "grwm/trajectories/dataset.h"

#include <cstring>

#include "grwm/numcore/binary_io.h"
#include "grwm/numcore/checkpoint.h"

namespace grwm::trajectories {

using numcore::ByteReader;
using numcore::ByteWriter;

std::vector<uint8_t> EncodeDataset(const Dataset& ds) {
  const DatasetHeader& h = ds.header;
  GRWM_REQUIRE(h.count == ds.trajectories.size(),
               "header count disagrees with trajectory list");
  const size_t frame_bytes = size_t(h.height) * h.width * h.channels;
  ByteWriter w;
  w.PutBytes(kDatasetMagic, 4);
  w.Put<uint32_t>(kDatasetVersion);
  w.Put<uint32_t>(h.count);
  w.Put<uint32_t>(h.length);
  w.Put<uint32_t>(h.height);
  w.Put<uint32_t>(h.width);
  w.Put<uint32_t>(h.channels);
  w.Put<uint64_t>(h.env_digest);
  w.Put<uint64_t>(h.maze.seed);
  w.Put<uint32_t>(static_cast<uint32_t>(h.maze.width));
  w.Put<uint32_t>(static_cast<uint32_t>(h.maze.height));
  w.Put<double>(h.maze.braid);
  for (const Trajectory& tr : ds.trajectories) {
    GRWM_REQUIRE(tr.length() == static_cast<int>(h.length) &&
                     tr.frames.size() == h.length && tr.poses.size() == h.length,
                 "trajectory length differs from header");
    w.Put<uint64_t>(tr.map_seed);
    w.Put<uint64_t>(tr.policy_seed);
    for (mazeworld::Action a : tr.actions) w.Put<uint8_t>(static_cast<uint8_t>(a));
    for (const mazeworld::Frame& f : tr.frames) {
      GRWM_REQUIRE(f.rgb.size() == frame_bytes &&
                       f.height == static_cast<int>(h.height) &&
                       f.width == static_cast<int>(h.width),
                   "frame dims differ from header");
      w.PutBytes(f.rgb.data(), frame_bytes);
    }
    for (const mazeworld::Pose& p : tr.poses) {
      w.Put<double>(p.x);
      w.Put<double>(p.y);
      w.Put<double>(p.theta());
    }
  }
  return std::move(w.bytes());
}

Dataset DecodeDataset(const std::vector<uint8_t>& bytes,
                      const mazeworld::EnvConfig* expected_env) {
  ByteReader r(bytes);
  char magic[4];
  r.GetBytes(magic, 4);
  if (std::memcmp(magic, kDatasetMagic, 4) != 0) {
    throw FormatError(FormatErrorKind::kBadMagic, "not a GRWM dataset");
  }
  const uint32_t version = r.Get<uint32_t>();
  if (version != kDatasetVersion) {
    throw FormatError(FormatErrorKind::kBadVersion,
                      "dataset version " + std::to_string(version));
  }
  Dataset ds;
  DatasetHeader& h = ds.header;
  h.count = r.Get<uint32_t>();
  h.length = r.Get<uint32_t>();
  h.height = r.Get<uint32_t>();
  h.width = r.Get<uint32_t>();
  h.channels = r.Get<uint32_t>();
  h.env_digest = r.Get<uint64_t>();
  h.maze.seed = r.Get<uint64_t>();
  h.maze.width = static_cast<int>(r.Get<uint32_t>());
  h.maze.height = static_cast<int>(r.Get<uint32_t>());
  h.maze.braid = r.Get<double>();
  if (h.channels != 3 || h.height == 0 || h.width == 0 || h.height > 64 ||
      h.width > 64) {
    throw FormatError(FormatErrorKind::kMalformed, "bad frame dims in header");
  }
  if (expected_env != nullptr && expected_env->Digest() != h.env_digest) {
    throw FormatError(FormatErrorKind::kConfigMismatch,
                      "dataset was collected with a different env config");
  }
  const size_t frame_bytes = size_t(h.height) * h.width * h.channels;
  const uint64_t per_traj =
      16 + uint64_t(h.length) * (1 + frame_bytes + 3 * sizeof(double));
  if (per_traj * h.count > r.remaining()) {
    throw FormatError(FormatErrorKind::kTruncated,
                      "header promises " + std::to_string(h.count) +
                          " trajectories but the file is shorter");
  }
  ds.trajectories.resize(h.count);
  for (Trajectory& tr : ds.trajectories) {
    tr.map_seed = r.Get<uint64_t>();
    tr.policy_seed = r.Get<uint64_t>();
    tr.actions.resize(h.length);
    for (mazeworld::Action& a : tr.actions) {
      const uint8_t v = r.Get<uint8_t>();
      if (v >= mazeworld::kNumActions) {
        throw FormatError(FormatErrorKind::kMalformed, "bad action byte");
      }
      a = static_cast<mazeworld::Action>(v);
    }
    tr.frames.resize(h.length);
    for (mazeworld::Frame& f : tr.frames) {
      f.height = static_cast<int>(h.height);
      f.width = static_cast<int>(h.width);
      f.rgb.resize(frame_bytes);
      r.GetBytes(f.rgb.data(), frame_bytes);
    }
    tr.poses.resize(h.length);
    for (mazeworld::Pose& p : tr.poses) {
      const double x = r.Get<double>();
      const double y = r.Get<double>();
      const double theta = r.Get<double>();
      p = mazeworld::Pose::FromRadians(x, y, theta);
    }
  }
  if (r.remaining() != 0) {
    throw FormatError(FormatErrorKind::kMalformed, "trailing bytes");
  }
  return ds;
}

void WriteDataset(const std::string& path, const Dataset& ds) {
  numcore::WriteFileBytes(path, EncodeDataset(ds));
}

Dataset ReadDataset(const std::string& path,
                    const mazeworld::EnvConfig* expected_env) {
  return DecodeDataset(numcore::ReadFileBytes(path), expected_env);
}

}  // namespace grwm::trajectories

/*
 * Copyright 2026 The qmalab Authors
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

/**
 * @file snapshot.hpp
 * @brief Field snapshot files: magic "QMA1", u32 version=1, u32 n, u32 N,
 *        u32 component count, then little-endian f64 values, row-major
 *        over the torus axes with components fastest.
 */

#ifndef QMALAB_SNAPSHOT_HPP
#define QMALAB_SNAPSHOT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fields.hpp"

namespace qma {

struct SnapshotData {
    std::uint32_t n = 0;
    std::uint32_t N = 0;
    std::uint32_t ncomp = 0;
    std::vector<double> data;  ///< data[pt * ncomp + c]
};

/** Write a snapshot; I/O failure raises a runtime error. */
void write_snapshot(const std::string &path, const SnapshotData &snap);

/** Read and validate a snapshot; bad magic/version/size is a config error. */
SnapshotData read_snapshot(const std::string &path);

void write_scalar_snapshot(const std::string &path, const ScalarField &f);

/** Load a one-component snapshot as a scalar field on its own grid. */
ScalarField read_scalar_snapshot(const std::string &path);

}  // namespace qma

#endif  // QMALAB_SNAPSHOT_HPP

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

#include "snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace qma {

namespace {

static_assert(std::endian::native == std::endian::little,
              "snapshot I/O assumes a little-endian host");

constexpr char kMagic[4] = {'Q', 'M', 'A', '1'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream &os, std::uint32_t v) {
    os.write(reinterpret_cast<const char *>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream &is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char *>(&v), sizeof(v));
    return v;
}

}  // namespace

void write_snapshot(const std::string &path, const SnapshotData &snap) {
    std::size_t total = 1;
    for (std::uint32_t a = 0; a < 4 * snap.n; ++a) total *= snap.N;
    require(snap.ncomp >= 1 && snap.data.size() == total * snap.ncomp,
            ErrorCode::config, "snapshot: data size mismatch");
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    require(os.good(), ErrorCode::runtime, "snapshot: cannot open " + path);
    os.write(kMagic, 4);
    write_u32(os, kVersion);
    write_u32(os, snap.n);
    write_u32(os, snap.N);
    write_u32(os, snap.ncomp);
    os.write(reinterpret_cast<const char *>(snap.data.data()),
             static_cast<std::streamsize>(snap.data.size() * sizeof(double)));
    require(os.good(), ErrorCode::runtime, "snapshot: write failed " + path);
}

SnapshotData read_snapshot(const std::string &path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), ErrorCode::runtime, "snapshot: cannot open " + path);
    char magic[4] = {};
    is.read(magic, 4);
    require(is.good() && std::memcmp(magic, kMagic, 4) == 0, ErrorCode::config,
            "snapshot: bad magic in " + path);
    require(read_u32(is) == kVersion, ErrorCode::config,
            "snapshot: unsupported version in " + path);
    SnapshotData snap;
    snap.n = read_u32(is);
    snap.N = read_u32(is);
    snap.ncomp = read_u32(is);
    require(is.good() && snap.n >= 1 && snap.n <= 4 && snap.N >= 4 &&
                snap.N % 2 == 0 && snap.ncomp >= 1,
            ErrorCode::config, "snapshot: bad header in " + path);
    std::size_t total = 1;
    for (std::uint32_t a = 0; a < 4 * snap.n; ++a) total *= snap.N;
    snap.data.resize(total * snap.ncomp);
    is.read(reinterpret_cast<char *>(snap.data.data()),
            static_cast<std::streamsize>(snap.data.size() * sizeof(double)));
    require(is.gcount() ==
                static_cast<std::streamsize>(snap.data.size() * sizeof(double)),
            ErrorCode::config, "snapshot: truncated data in " + path);
    return snap;
}

void write_scalar_snapshot(const std::string &path, const ScalarField &f) {
    SnapshotData snap;
    snap.n = static_cast<std::uint32_t>(f.grid()->n());
    snap.N = static_cast<std::uint32_t>(f.grid()->N());
    snap.ncomp = 1;
    snap.data = f.values();
    write_snapshot(path, snap);
}

ScalarField read_scalar_snapshot(const std::string &path) {
    const SnapshotData snap = read_snapshot(path);
    require(snap.ncomp == 1, ErrorCode::config,
            "snapshot: expected a single-component field in " + path);
    const GridPtr grid =
        TorusGrid::make(static_cast<int>(snap.n), static_cast<int>(snap.N));
    return ScalarField(grid, snap.data);
}

}  // namespace qma

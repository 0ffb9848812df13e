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

#ifndef QMALAB_COMMON_HPP
#define QMALAB_COMMON_HPP

#include <algorithm>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qma {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

constexpr double kPi = 3.141592653589793238462643383279502884;

/** Error categories surfaced through the C API and the CLI exit code. */
enum class ErrorCode : int {
    ok = 0,
    config = 1,    ///< malformed input, bad dimensions, unknown keys
    residual = 2,  ///< a verification residual exceeded its threshold
    stage = 3,     ///< a continuation stage or linear solve failed
    runtime = 4,   ///< I/O or other environmental failure
};

/** Exception carrying an ErrorCode; translated to status codes at the C API. */
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string &message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string &message) {
    if (!condition) throw Error(code, message);
}

/**
 * @brief Deterministic uniform double in [0, 1) from a raw 64-bit draw.
 *
 * The mapping (x >> 11) * 2^-53 is fixed here so that streams are
 * reproducible across standard library implementations.
 */
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t raw() { return state_(); }

    double uniform() {
        return static_cast<double>(state_() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    cplx complex_uniform(double scale) {
        double re = uniform(-scale, scale);
        double im = uniform(-scale, scale);
        return {re, im};
    }

    /// Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n) { return state_() % n; }

  private:
    std::mt19937_64 state_;
};

/** Dense rank-3 tensor of complex components, cubic shape m^3. */
struct CTensor3 {
    int m = 0;
    std::vector<cplx> v;

    CTensor3() = default;
    explicit CTensor3(int m_) : m(m_), v(static_cast<std::size_t>(m_) * m_ * m_) {}

    cplx &operator()(int a, int b, int c) {
        return v[(static_cast<std::size_t>(a) * m + b) * m + c];
    }
    cplx operator()(int a, int b, int c) const {
        return v[(static_cast<std::size_t>(a) * m + b) * m + c];
    }

    double max_abs() const {
        double mx = 0.0;
        for (const cplx &x : v) mx = std::max(mx, std::abs(x));
        return mx;
    }
};

/** Dense rank-4 tensor of complex components, shape m^4. */
struct CTensor4 {
    int m = 0;
    std::vector<cplx> v;

    CTensor4() = default;
    explicit CTensor4(int m_)
        : m(m_), v(static_cast<std::size_t>(m_) * m_ * m_ * m_) {}

    cplx &operator()(int a, int b, int c, int d) {
        return v[((static_cast<std::size_t>(a) * m + b) * m + c) * m + d];
    }
    cplx operator()(int a, int b, int c, int d) const {
        return v[((static_cast<std::size_t>(a) * m + b) * m + c) * m + d];
    }

    double max_abs() const {
        double mx = 0.0;
        for (const cplx &x : v) mx = std::max(mx, std::abs(x));
        return mx;
    }
};

}  // namespace qma

#endif  // QMALAB_COMMON_HPP

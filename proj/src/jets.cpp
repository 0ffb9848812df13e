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

#include "jets.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>

namespace qma {

namespace {

std::uint32_t pow5(int k) {
    std::uint32_t p = 1;
    for (int i = 0; i < k; ++i) p *= 5;
    return p;
}

void check_same_space(const Jet4 &a, const Jet4 &b, const char *what) {
    require(!a.empty() && !b.empty(), ErrorCode::config,
            std::string(what) + ": empty jet operand");
    require(a.space() == b.space(), ErrorCode::config,
            std::string(what) + ": jets from different spaces");
}

}  // namespace

// ---------------------------------------------------------------------------
// JetSpace
// ---------------------------------------------------------------------------

JetSpace::JetSpace(int m) : m_(m) {
    const int nv = 2 * m;
    deg_start_[0] = 0;
    Exponents e{};
    // Enumerate monomials grouped by total degree, degree 0 first.
    for (int d = 0; d <= kOrder; ++d) {
        std::vector<Exponents> bucket;
        std::vector<int> stack;
        // Iterative multi-index enumeration: distribute degree d over nv vars.
        std::function<void(int, int)> rec = [&](int v, int left) {
            if (v == nv - 1) {
                e[v] = static_cast<std::uint8_t>(left);
                bucket.push_back(e);
                e[v] = 0;
                return;
            }
            for (int take = 0; take <= left; ++take) {
                e[v] = static_cast<std::uint8_t>(take);
                rec(v + 1, left - take);
            }
            e[v] = 0;
        };
        rec(0, d);
        for (const auto &b : bucket) {
            exps_.push_back(b);
            degs_.push_back(d);
        }
        deg_start_[d + 1] = static_cast<int>(exps_.size());
    }
    keys_.resize(exps_.size());
    key_to_index_.assign(pow5(nv), -1);
    for (std::size_t i = 0; i < exps_.size(); ++i) {
        std::uint32_t key = 0;
        for (int v = 0; v < nv; ++v) key += exps_[i][v] * pow5(v);
        keys_[i] = key;
        key_to_index_[key] = static_cast<int>(i);
    }
    conj_.resize(exps_.size());
    for (std::size_t i = 0; i < exps_.size(); ++i) {
        Exponents s{};
        for (int v = 0; v < m_; ++v) {
            s[v] = exps_[i][m_ + v];
            s[m_ + v] = exps_[i][v];
        }
        conj_[i] = index_of(s);
    }
}

int JetSpace::index_of(const Exponents &e) const {
    int d = 0;
    std::uint32_t key = 0;
    for (int v = 0; v < nvars(); ++v) {
        d += e[v];
        key += e[v] * pow5(v);
    }
    if (d > kOrder) return -1;
    return key_to_index_[key];
}

std::shared_ptr<const JetSpace> JetSpace::get(int m) {
    require(m >= 1 && m <= 4, ErrorCode::config,
            "JetSpace: complex dimension must be between 1 and 4");
    static std::mutex mu;
    static std::map<int, std::shared_ptr<const JetSpace>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;
    auto space = std::make_shared<const JetSpace>(m);
    cache[m] = space;
    return space;
}

// ---------------------------------------------------------------------------
// Jet4
// ---------------------------------------------------------------------------

Jet4::Jet4(JetSpacePtr space, int valid)
    : space_(std::move(space)), c_(space_->count(), cplx(0.0)), valid_(valid) {}

Jet4 Jet4::constant(const JetSpacePtr &space, cplx v) {
    Jet4 j(space, JetSpace::kOrder);
    j.c_[0] = v;
    return j;
}

Jet4 Jet4::variable(const JetSpacePtr &space, int var) {
    require(var >= 0 && var < space->nvars(), ErrorCode::config,
            "Jet4::variable: variable index out of range");
    Jet4 j(space, JetSpace::kOrder);
    JetSpace::Exponents e{};
    e[var] = 1;
    j.c_[space->index_of(e)] = 1.0;
    return j;
}

cplx Jet4::partial(const std::vector<int> &vars) const {
    require(!empty(), ErrorCode::config, "Jet4::partial on empty jet");
    require(static_cast<int>(vars.size()) <= valid_, ErrorCode::config,
            "Jet4::partial: derivative order exceeds the jet's valid order");
    JetSpace::Exponents e{};
    for (int v : vars) {
        require(v >= 0 && v < space_->nvars(), ErrorCode::config,
                "Jet4::partial: variable index out of range");
        ++e[v];
    }
    const int idx = space_->index_of(e);
    double mult = 1.0;
    for (int v = 0; v < space_->nvars(); ++v)
        for (int k = 2; k <= e[v]; ++k) mult *= k;
    return c_[idx] * mult;
}

cplx Jet4::partial(std::initializer_list<int> vars) const {
    return partial(std::vector<int>(vars));
}

cplx Jet4::eval(const Vec &dz) const {
    require(!empty(), ErrorCode::config, "Jet4::eval on empty jet");
    require(dz.size() == space_->m(), ErrorCode::config,
            "Jet4::eval: displacement dimension mismatch");
    cplx sum = 0.0;
    for (int i = 0; i < space_->count(); ++i) {
        if (space_->degree(i) > valid_ || c_[i] == cplx(0.0)) continue;
        cplx term = c_[i];
        const auto &e = space_->exponents(i);
        for (int v = 0; v < space_->m(); ++v) {
            for (int k = 0; k < e[v]; ++k) term *= dz(v);
            for (int k = 0; k < e[space_->m() + v]; ++k) term *= std::conj(dz(v));
        }
        sum += term;
    }
    return sum;
}

Jet4 Jet4::derivative(int var) const {
    require(!empty(), ErrorCode::config, "Jet4::derivative on empty jet");
    require(valid_ >= 1, ErrorCode::config,
            "Jet4::derivative: no valid orders left");
    require(var >= 0 && var < space_->nvars(), ErrorCode::config,
            "Jet4::derivative: variable index out of range");
    Jet4 out(space_, valid_ - 1);
    for (int i = 0; i < space_->count(); ++i) {
        const auto &e = space_->exponents(i);
        if (e[var] == 0 || c_[i] == cplx(0.0)) continue;
        JetSpace::Exponents t = e;
        --t[var];
        out.c_[space_->index_of(t)] = c_[i] * static_cast<double>(e[var]);
    }
    return out;
}

Jet4 Jet4::conjugate() const {
    require(!empty(), ErrorCode::config, "Jet4::conjugate on empty jet");
    Jet4 out(space_, valid_);
    for (int i = 0; i < space_->count(); ++i)
        out.c_[space_->conj_index(i)] = std::conj(c_[i]);
    return out;
}

Jet4 Jet4::truncated(int new_valid) const {
    require(!empty(), ErrorCode::config, "Jet4::truncated on empty jet");
    Jet4 out = *this;
    out.valid_ = std::min(valid_, new_valid);
    require(out.valid_ >= 0, ErrorCode::config,
            "Jet4::truncated: negative valid order");
    for (int i = space_->degree_range(out.valid_).second; i < space_->count(); ++i)
        out.c_[i] = 0.0;
    return out;
}

double Jet4::max_abs_coeff() const {
    double mx = 0.0;
    for (const cplx &v : c_) mx = std::max(mx, std::abs(v));
    return mx;
}

Jet4 Jet4::operator-() const {
    Jet4 out = *this;
    for (cplx &v : out.c_) v = -v;
    return out;
}

Jet4 &Jet4::operator+=(const Jet4 &o) {
    check_same_space(*this, o, "jet add");
    valid_ = std::min(valid_, o.valid_);
    for (int i = 0; i < space_->count(); ++i) c_[i] += o.c_[i];
    return *this;
}

Jet4 &Jet4::operator-=(const Jet4 &o) {
    check_same_space(*this, o, "jet sub");
    valid_ = std::min(valid_, o.valid_);
    for (int i = 0; i < space_->count(); ++i) c_[i] -= o.c_[i];
    return *this;
}

Jet4 &Jet4::operator+=(cplx v) {
    require(!empty(), ErrorCode::config, "jet add: empty jet");
    c_[0] += v;
    return *this;
}

Jet4 &Jet4::operator-=(cplx v) {
    require(!empty(), ErrorCode::config, "jet sub: empty jet");
    c_[0] -= v;
    return *this;
}

Jet4 &Jet4::operator*=(cplx v) {
    require(!empty(), ErrorCode::config, "jet scale: empty jet");
    for (cplx &x : c_) x *= v;
    return *this;
}

Jet4 operator*(const Jet4 &a, const Jet4 &b) {
    check_same_space(a, b, "jet mul");
    const JetSpace &sp = *a.space_;
    const int rv = std::min(a.valid_, b.valid_);
    Jet4 out(a.space_, rv);
    for (int da = 0; da <= rv; ++da) {
        const auto [a0, a1] = sp.degree_range(da);
        const int b1 = sp.degree_range(rv - da).second;
        for (int i = a0; i < a1; ++i) {
            const cplx ai = a.c_[i];
            if (ai == cplx(0.0)) continue;
            for (int j = 0; j < b1; ++j) {
                const cplx bj = b.c_[j];
                if (bj == cplx(0.0)) continue;
                out.c_[sp.product_index(i, j)] += ai * bj;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Analytic composition
// ---------------------------------------------------------------------------

Jet4 jet_series(const std::array<cplx, JetSpace::kOrder + 1> &f, const Jet4 &u) {
    require(!u.empty(), ErrorCode::config, "jet_series: empty jet");
    require(std::abs(u.value()) <= 1e-12 * (1.0 + u.max_abs_coeff()),
            ErrorCode::config, "jet_series: argument must vanish at the center");
    Jet4 r = Jet4::constant(u.space(), f[JetSpace::kOrder]);
    for (int k = JetSpace::kOrder - 1; k >= 0; --k) {
        r = r * u;
        r += f[k];
    }
    return r;
}

Jet4 jet_recip(const Jet4 &a) {
    const cplx c0 = a.value();
    require(std::abs(c0) > 0.0, ErrorCode::config, "jet_recip: zero at center");
    Jet4 u = a;
    u -= c0;
    std::array<cplx, 5> f;
    cplx p = 1.0 / c0;
    for (int k = 0; k <= 4; ++k) {
        f[k] = p;
        p *= -1.0 / c0;
    }
    return jet_series(f, u);
}

Jet4 jet_div(const Jet4 &a, const Jet4 &b) { return a * jet_recip(b); }

Jet4 jet_sqrt(const Jet4 &a) {
    const cplx c0 = a.value();
    require(std::abs(c0) > 0.0, ErrorCode::config, "jet_sqrt: zero at center");
    Jet4 u = a;
    u -= c0;
    const cplx s = std::sqrt(c0);
    // binomial(1/2, k) for k = 0..4
    static const double half_binom[5] = {1.0, 0.5, -0.125, 0.0625, -0.0390625};
    std::array<cplx, 5> f;
    cplx p = s;
    for (int k = 0; k <= 4; ++k) {
        f[k] = half_binom[k] * p;
        p /= c0;
    }
    return jet_series(f, u);
}

Jet4 jet_log(const Jet4 &a) {
    const cplx c0 = a.value();
    require(std::abs(c0) > 0.0, ErrorCode::config, "jet_log: zero at center");
    Jet4 u = a;
    u -= c0;
    std::array<cplx, 5> f;
    f[0] = std::log(c0);
    cplx p = 1.0 / c0;
    for (int k = 1; k <= 4; ++k) {
        f[k] = ((k % 2 == 1) ? 1.0 : -1.0) * p / static_cast<double>(k);
        p /= c0;
    }
    return jet_series(f, u);
}

Jet4 jet_exp(const Jet4 &a) {
    const cplx c0 = a.value();
    Jet4 u = a;
    u -= c0;
    const cplx e0 = std::exp(c0);
    std::array<cplx, 5> f;
    double fact = 1.0;
    for (int k = 0; k <= 4; ++k) {
        if (k > 0) fact *= k;
        f[k] = e0 / fact;
    }
    return jet_series(f, u);
}

Jet4 substitute(const Jet4 &f, const std::vector<Jet4> &args) {
    require(!f.empty(), ErrorCode::config, "substitute: empty jet");
    const JetSpace &sp = *f.space();
    require(static_cast<int>(args.size()) == sp.nvars(), ErrorCode::config,
            "substitute: needs one argument jet per source variable");
    const JetSpacePtr target = args[0].space();
    int va = JetSpace::kOrder;
    for (const Jet4 &g : args) {
        require(!g.empty() && g.space() == target, ErrorCode::config,
                "substitute: argument jets must share one target space");
        require(std::abs(g.value()) <= 1e-12 * (1.0 + g.max_abs_coeff()),
                ErrorCode::config,
                "substitute: argument jets must vanish at the target center");
        va = std::min(va, g.valid_order());
    }
    const int rv = std::min(f.valid_order(), va);

    // Cached powers of each argument; args are nilpotent so high powers
    // drop low degrees automatically.
    std::vector<std::array<Jet4, JetSpace::kOrder + 1>> pw(args.size());
    for (std::size_t v = 0; v < args.size(); ++v) {
        pw[v][0] = Jet4::constant(target, 1.0);
        for (int k = 1; k <= JetSpace::kOrder; ++k) pw[v][k] = pw[v][k - 1] * args[v];
    }

    Jet4 out = Jet4::constant(target, 0.0);
    for (int idx = 0; idx < sp.count(); ++idx) {
        if (sp.degree(idx) > rv) continue;
        const cplx c = f.coefficient(idx);
        if (c == cplx(0.0)) continue;
        Jet4 mono = Jet4::constant(target, c);
        const auto &e = sp.exponents(idx);
        for (int v = 0; v < sp.nvars(); ++v)
            if (e[v] > 0) mono = mono * pw[v][e[v]];
        out += mono;
    }
    return out.truncated(rv);
}

// ---------------------------------------------------------------------------
// JetMat
// ---------------------------------------------------------------------------

JetMat JetMat::identity(const JetSpacePtr &space, int n) {
    JetMat M(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            M.at(r, c) = Jet4::constant(space, r == c ? 1.0 : 0.0);
    return M;
}

JetMat JetMat::operator*(const JetMat &o) const {
    require(cols == o.rows && rows > 0 && o.cols > 0, ErrorCode::config,
            "JetMat mul: dimension mismatch");
    JetMat out(rows, o.cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < o.cols; ++c) {
            Jet4 sum = at(r, 0) * o.at(0, c);
            for (int k = 1; k < cols; ++k) sum += at(r, k) * o.at(k, c);
            out.at(r, c) = sum;
        }
    }
    return out;
}

JetMat JetMat::operator+(const JetMat &o) const {
    require(rows == o.rows && cols == o.cols, ErrorCode::config,
            "JetMat add: dimension mismatch");
    JetMat out = *this;
    for (std::size_t i = 0; i < a.size(); ++i) out.a[i] += o.a[i];
    return out;
}

JetMat JetMat::operator-(const JetMat &o) const {
    require(rows == o.rows && cols == o.cols, ErrorCode::config,
            "JetMat sub: dimension mismatch");
    JetMat out = *this;
    for (std::size_t i = 0; i < a.size(); ++i) out.a[i] -= o.a[i];
    return out;
}

JetMat JetMat::conjugate() const {
    JetMat out(rows, cols);
    for (std::size_t i = 0; i < a.size(); ++i) out.a[i] = a[i].conjugate();
    return out;
}

JetMat JetMat::transpose() const {
    JetMat out(cols, rows);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) out.at(c, r) = at(r, c);
    return out;
}

JetMat JetMat::inverse() const {
    require(rows == cols && rows > 0, ErrorCode::config,
            "JetMat inverse: square matrix required");
    const JetSpacePtr space = a[0].space();
    JetMat L = *this;
    JetMat R = identity(space, rows);
    for (int k = 0; k < rows; ++k) {
        int piv = k;
        double best = std::abs(L.at(k, k).value());
        for (int r = k + 1; r < rows; ++r) {
            const double v = std::abs(L.at(r, k).value());
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        require(best > 1e-14, ErrorCode::config,
                "JetMat inverse: singular at center");
        if (piv != k) {
            for (int c = 0; c < cols; ++c) {
                std::swap(L.at(k, c), L.at(piv, c));
                std::swap(R.at(k, c), R.at(piv, c));
            }
        }
        const Jet4 inv_piv = jet_recip(L.at(k, k));
        for (int c = 0; c < cols; ++c) {
            L.at(k, c) = L.at(k, c) * inv_piv;
            R.at(k, c) = R.at(k, c) * inv_piv;
        }
        for (int r = 0; r < rows; ++r) {
            if (r == k) continue;
            const Jet4 factor = L.at(r, k);
            if (factor.max_abs_coeff() == 0.0) continue;
            for (int c = 0; c < cols; ++c) {
                L.at(r, c) -= factor * L.at(k, c);
                R.at(r, c) -= factor * R.at(k, c);
            }
        }
    }
    return R;
}

Jet4 JetMat::det() const {
    require(rows == cols && rows > 0, ErrorCode::config,
            "JetMat det: square matrix required");
    if (rows == 1) return at(0, 0);
    // Cofactor expansion along the first row; fine for rows <= 4.
    Jet4 sum;
    for (int c = 0; c < cols; ++c) {
        JetMat minor(rows - 1, cols - 1);
        for (int r = 1; r < rows; ++r) {
            int cc = 0;
            for (int c2 = 0; c2 < cols; ++c2) {
                if (c2 == c) continue;
                minor.at(r - 1, cc++) = at(r, c2);
            }
        }
        Jet4 term = at(0, c) * minor.det();
        if (c % 2 == 1) term = -term;
        if (sum.empty())
            sum = term;
        else
            sum += term;
    }
    return sum;
}

Mat JetMat::values() const {
    Mat M(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) M(r, c) = at(r, c).value();
    return M;
}

}  // namespace qma

#pragma once

// Shared test machinery: independent brute-force sup oracles for the bound
// formulas (evaluated in long double on dense grids including the interval
// endpoints), a random expression-tree generator for soundness fuzzing, and
// a scoped temporary directory.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <unistd.h>
#include <vector>

#include "proqoi/expr.hpp"

namespace oracle {

inline long double ipow_ld(long double x, int n) {
    long double r = 1.0L;
    for (int i = 0; i < n; ++i)
        r *= x;
    return r;
}

// Grid offsets d over [dlo, dhi], hitting both endpoints exactly and never
// stepping outside the interval. The difference formulas below are written in
// terms of d so that the evaluated drift has no catastrophic cancellation:
// its relative rounding error stays a few ulps of the drift itself, far below
// the certified formulas' safety guard.
inline long double grid_offset(long double dlo, long double dhi, int i, int pts) {
    if (i == 0)
        return dlo;
    if (i == pts - 1)
        return dhi;
    const long double d = dlo + (dhi - dlo) * i / (pts - 1);
    return std::min(std::max(d, dlo), dhi);
}

// sup over x' in [x-e, x+e] of |x'^n - x^n|, via the exact factorization
// x'^n - x^n = (x' - x) * sum_{k=0}^{n-1} x'^k x^(n-1-k).
inline long double sup_power(int n, double x, double e, int pts = 2001) {
    long double sup = 0.0L;
    for (int i = 0; i < pts; ++i) {
        const long double d =
            grid_offset(-static_cast<long double>(e), static_cast<long double>(e), i, pts);
        const long double xp = static_cast<long double>(x) + d;
        long double series = 0.0L;
        for (int k = 0; k < n; ++k)
            series += ipow_ld(xp, k) * ipow_ld(static_cast<long double>(x), n - 1 - k);
        sup = std::max(sup, std::fabs(d * series));
    }
    return sup;
}

// sup over x' in [max(x-e,0), x+e] of |sqrt(x') - sqrt(x)|, via
// sqrt(x') - sqrt(x) = (x' - x) / (sqrt(x') + sqrt(x)).
inline long double sup_sqrt(double x, double e, int pts = 2001) {
    const long double xl = static_cast<long double>(x);
    const long double dlo = x - e <= 0.0 ? -xl : -static_cast<long double>(e);
    long double sup = 0.0L;
    for (int i = 0; i < pts; ++i) {
        const long double d = grid_offset(dlo, static_cast<long double>(e), i, pts);
        const long double xp = std::max(xl + d, 0.0L);
        const long double den = std::sqrt(xp) + std::sqrt(xl);
        if (den > 0.0L)
            sup = std::max(sup, std::fabs(d) / den);
    }
    return sup;
}

// sup over x' in [x-e, x+e] of |1/(x'+c) - 1/(x+c)|, via
// 1/(s+d) - 1/s = -d / ((s+d) s); caller guarantees the pole stays outside
// the interval.
inline long double sup_radical(double c, double x, double e, int pts = 2001) {
    const long double s = static_cast<long double>(x) + c;
    long double sup = 0.0L;
    for (int i = 0; i < pts; ++i) {
        const long double d =
            grid_offset(-static_cast<long double>(e), static_cast<long double>(e), i, pts);
        sup = std::max(sup, std::fabs(d / ((s + d) * s)));
    }
    return sup;
}

// Exact sup of |sum w_i xi_i| over the |xi_i| <= e_i box (attained at a
// sign-aligned corner): sum |w_i| e_i, in long double.
inline long double sup_weighted_sum(std::span<const double> w, std::span<const double> e) {
    long double sup = 0.0L;
    for (std::size_t i = 0; i < w.size(); ++i)
        sup += std::fabs(static_cast<long double>(w[i])) * static_cast<long double>(e[i]);
    return sup;
}

// sup over the 2-D box of |x1' x2' - x1 x2|, via the exact expansion
// (x1+da)(x2+db) - x1 x2 = da (x2+db) + db x1.
inline long double sup_product(double x1, double e1, double x2, double e2, int pts = 101) {
    long double sup = 0.0L;
    for (int i = 0; i < pts; ++i) {
        const long double da =
            grid_offset(-static_cast<long double>(e1), static_cast<long double>(e1), i, pts);
        for (int j = 0; j < pts; ++j) {
            const long double db = grid_offset(-static_cast<long double>(e2),
                                               static_cast<long double>(e2), j, pts);
            sup = std::max(sup, std::fabs(da * (static_cast<long double>(x2) + db) +
                                          db * static_cast<long double>(x1)));
        }
    }
    return sup;
}

// sup over the 2-D box of |x1'/x2' - x1/x2|, via the exact expansion
// (x1+da)/(x2+db) - x1/x2 = (da x2 - db x1) / ((x2+db) x2); caller keeps 0
// out of the x2 box.
inline long double sup_quotient(double x1, double e1, double x2, double e2, int pts = 101) {
    long double sup = 0.0L;
    for (int i = 0; i < pts; ++i) {
        const long double da =
            grid_offset(-static_cast<long double>(e1), static_cast<long double>(e1), i, pts);
        for (int j = 0; j < pts; ++j) {
            const long double db = grid_offset(-static_cast<long double>(e2),
                                               static_cast<long double>(e2), j, pts);
            const long double num = da * static_cast<long double>(x2) -
                                    db * static_cast<long double>(x1);
            const long double den =
                (static_cast<long double>(x2) + db) * static_cast<long double>(x2);
            sup = std::max(sup, std::fabs(num / den));
        }
    }
    return sup;
}

// ---- random expression trees -----------------------------------------------

// Trees over all node kinds, shaped so evaluation stays finite on
// [-3, 3]^nvars boxes: Power children are leaves with exponent <= 3, and half
// the Quotient denominators are squared-plus-one (pole-free).
class TreeGen {
public:
    TreeGen(std::uint64_t seed, std::size_t nvars) : rng_(seed), nvars_(nvars) {}

    proqoi::QoiExprPtr gen(int depth) {
        using proqoi::QoiExpr;
        std::uniform_int_distribution<int> kind_dist(0, 6);
        if (depth <= 0)
            return leaf();
        switch (kind_dist(rng_)) {
        case 0: { // weighted sum, 2-3 children
            std::uniform_int_distribution<int> arity(2, 3);
            std::uniform_real_distribution<double> weight(-2.0, 2.0);
            const int k = arity(rng_);
            std::vector<proqoi::QoiExprPtr> children;
            std::vector<double> weights;
            for (int i = 0; i < k; ++i) {
                children.push_back(gen(depth - 1));
                double w = weight(rng_);
                if (std::fabs(w) < 0.1)
                    w = 0.5;
                weights.push_back(w);
            }
            return QoiExpr::sum(std::move(children), std::move(weights));
        }
        case 1:
            return QoiExpr::product(gen(depth - 1), gen(depth - 1));
        case 2: { // quotient; half of them provably pole-free
            if (flip()) {
                auto den = QoiExpr::sum({QoiExpr::power(leaf_var(), 2), QoiExpr::constant(1.0)},
                                        {1.0, 1.0});
                return QoiExpr::quotient(gen(depth - 1), std::move(den));
            }
            return QoiExpr::quotient(gen(depth - 1), gen(depth - 1));
        }
        case 3: { // integer power of a leaf
            std::uniform_int_distribution<int> n_dist(1, 3);
            return QoiExpr::power(leaf_var(), n_dist(rng_));
        }
        case 4: // sqrt of a square: domain-safe
            return QoiExpr::sqrt(QoiExpr::power(leaf_var(), 2));
        case 5: { // scale
            std::uniform_real_distribution<double> factor(0.5, 3.0);
            const double a = factor(rng_) * (flip() ? 1.0 : -1.0);
            return QoiExpr::scale(a, gen(depth - 1));
        }
        default: { // radical shape 1/(x + c)
            std::uniform_real_distribution<double> shift(-4.0, 4.0);
            auto den = QoiExpr::sum({gen(depth - 1), QoiExpr::constant(shift(rng_))},
                                    {1.0, 1.0});
            return QoiExpr::quotient(QoiExpr::constant(1.0), std::move(den));
        }
        }
    }

    std::mt19937_64& rng() noexcept { return rng_; }

private:
    bool flip() { return std::uniform_int_distribution<int>(0, 1)(rng_) == 1; }

    proqoi::QoiExprPtr leaf_var() {
        std::uniform_int_distribution<std::size_t> var(0, nvars_ - 1);
        return proqoi::QoiExpr::var(var(rng_));
    }

    proqoi::QoiExprPtr leaf() {
        if (std::uniform_int_distribution<int>(0, 4)(rng_) == 0) {
            std::uniform_real_distribution<double> c(-5.0, 5.0);
            return proqoi::QoiExpr::constant(c(rng_));
        }
        return leaf_var();
    }

    std::mt19937_64 rng_;
    std::size_t nvars_;
};

// ---- scoped temporary directory ---------------------------------------------

struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("proqoi-" + tag + "-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string str() const { return path.string(); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

} // namespace oracle

#ifndef AGSIM_STATS_HPP
#define AGSIM_STATS_HPP

#include <array>
#include <cmath>
#include <vector>

#include "agsim/core.hpp"

namespace agsim {

inline double mean(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double sample_stddev(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

inline double standard_error(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    return sample_stddev(xs) / std::sqrt(static_cast<double>(xs.size()));
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 1.0;
};

inline LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    LinearFit f;
    std::size_t n = xs.size();
    if (n < 2 || ys.size() != n) return f;
    double mx = mean(xs), my = mean(ys);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (syy == 0.0) {
        f.r_squared = 1.0;
    } else {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double e = ys[i] - (f.intercept + f.slope * xs[i]);
            ss_res += e * e;
        }
        f.r_squared = 1.0 - ss_res / syy;
    }
    return f;
}

struct QuadraticFit {
    std::array<double, 3> coeff{};  // c0 + c1 x + c2 x^2
    double r_squared = 1.0;
};

// Least-squares quadratic via the 3x3 normal equations (fine at this scale).
inline QuadraticFit quadratic_fit(const std::vector<double>& xs,
                                  const std::vector<double>& ys) {
    QuadraticFit f;
    std::size_t n = xs.size();
    if (n < 3 || ys.size() != n) return f;

    double s[5] = {static_cast<double>(n), 0, 0, 0, 0};
    double b[3] = {0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        double x = xs[i], p = x;
        for (int k = 1; k <= 4; ++k, p *= x) s[k] += p;
        b[0] += ys[i];
        b[1] += ys[i] * x;
        b[2] += ys[i] * x * x;
    }
    double a[3][4] = {{s[0], s[1], s[2], b[0]},
                      {s[1], s[2], s[3], b[1]},
                      {s[2], s[3], s[4], b[2]}};
    // Gaussian elimination with partial pivoting
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        for (int c = 0; c < 4; ++c) std::swap(a[col][c], a[piv][c]);
        if (a[col][col] == 0.0) return f;
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            double factor = a[r][col] / a[col][col];
            for (int c = col; c < 4; ++c) a[r][c] -= factor * a[col][c];
        }
    }
    for (int i = 0; i < 3; ++i) f.coeff[static_cast<std::size_t>(i)] = a[i][3] / a[i][i];

    double my = mean(ys), ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double pred = f.coeff[0] + f.coeff[1] * xs[i] + f.coeff[2] * xs[i] * xs[i];
        ss_res += (ys[i] - pred) * (ys[i] - pred);
        ss_tot += (ys[i] - my) * (ys[i] - my);
    }
    f.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
    return f;
}

}  // namespace agsim

#endif  // AGSIM_STATS_HPP

#include "vlab/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace vlab::opt {

namespace {

double safe_eval(const Objective& f, std::span<const double> x) {
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

}  // namespace

MinimizeResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& options) {
    const std::size_t n = x0.size();
    MinimizeResult result;
    if (n == 0) {
        result.x = std::move(x0);
        result.fx = safe_eval(f, result.x);
        result.evaluations = 1;
        result.converged = true;
        return result;
    }

    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += options.initial_step;
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i <= n; ++i) values[i] = safe_eval(f, simplex[i]);
    result.evaluations = static_cast<int>(n + 1);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    auto eval = [&](const std::vector<double>& x) {
        ++result.evaluations;
        return safe_eval(f, x);
    };

    int it = 0;
    for (; it < options.max_iterations; ++it) {
        std::iota(order.begin(), order.end(), 0);
        // Stable ordering keeps ties (and therefore the whole run) deterministic.
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[n - 1];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t j = 0; j < n; ++j)
                diameter = std::max(diameter, std::abs(simplex[i][j] - simplex[best][j]));
        }
        if (diameter < options.xtol) {
            result.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
        }
        for (auto& c : centroid) c /= static_cast<double>(n);

        for (std::size_t j = 0; j < n; ++j) trial[j] = centroid[j] + (centroid[j] - simplex[worst][j]);
        const double f_reflect = eval(trial);

        if (f_reflect < values[best]) {
            for (std::size_t j = 0; j < n; ++j) trial2[j] = centroid[j] + 2.0 * (centroid[j] - simplex[worst][j]);
            const double f_expand = eval(trial2);
            if (f_expand < f_reflect) {
                simplex[worst] = trial2;
                values[worst] = f_expand;
            } else {
                simplex[worst] = trial;
                values[worst] = f_reflect;
            }
            continue;
        }
        if (f_reflect < values[second_worst]) {
            simplex[worst] = trial;
            values[worst] = f_reflect;
            continue;
        }

        const bool outside = f_reflect < values[worst];
        for (std::size_t j = 0; j < n; ++j) {
            trial2[j] = outside ? centroid[j] + 0.5 * (trial[j] - centroid[j])
                                : centroid[j] + 0.5 * (simplex[worst][j] - centroid[j]);
        }
        const double f_contract = eval(trial2);
        if (f_contract < (outside ? f_reflect : values[worst])) {
            simplex[worst] = trial2;
            values[worst] = f_contract;
            continue;
        }

        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t j = 0; j < n; ++j) simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
            values[i] = eval(simplex[i]);
        }
    }

    const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    result.x = simplex[best];
    result.fx = values[best];
    result.iterations = it;
    return result;
}

double golden_section(const std::function<double(double)>& f, double lo, double hi, double tol, int max_iterations) {
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    if (!std::isfinite(f1)) f1 = std::numeric_limits<double>::infinity();
    if (!std::isfinite(f2)) f2 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < max_iterations && hi - lo > tol; ++i) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
            if (!std::isfinite(f1)) f1 = std::numeric_limits<double>::infinity();
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
            if (!std::isfinite(f2)) f2 = std::numeric_limits<double>::infinity();
        }
    }
    return f1 <= f2 ? x1 : x2;
}

MinimizeResult coordinate_polish(const Objective& f, std::vector<double> x, double radius, int sweeps) {
    MinimizeResult result;
    double fx = safe_eval(f, x);
    result.evaluations = 1;
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        const double start = fx;
        for (std::size_t i = 0; i < x.size(); ++i) {
            std::vector<double> probe = x;
            auto along = [&](double v) {
                probe[i] = v;
                ++result.evaluations;
                return safe_eval(f, probe);
            };
            const double xi = golden_section(along, x[i] - radius, x[i] + radius);
            probe[i] = xi;
            const double fi = safe_eval(f, probe);
            ++result.evaluations;
            if (fi < fx) {
                x[i] = xi;
                fx = fi;
            }
        }
        ++result.iterations;
        if (!(fx < start)) break;
    }
    result.x = std::move(x);
    result.fx = fx;
    result.converged = true;
    return result;
}

}  // namespace vlab::opt

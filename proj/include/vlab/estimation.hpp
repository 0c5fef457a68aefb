#pragma once

#include "vlab/garch.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vlab::estimation {

struct FitOptions {
    int max_iterations = 2000;
    /// Simplex diameter (transformed space) at which Nelder-Mead stops.
    double xtol = 1e-8;
    /// Persistence is mapped strictly inside 1 - stationarity_margin.
    double stationarity_margin = 1e-6;
    std::size_t min_observations = 50;
    /// Nelder-Mead + golden-section polish rounds; each restart begins from the best point so far.
    int max_rounds = 4;
};

/// Maximum-likelihood estimate with inference.
///
/// `names`, `estimates`, `std_errors` and `p_values` are aligned and list
/// only the free parameters of the model, in the order
/// mu, omega, alpha, [gamma], beta, [nu], [lambda].
struct FitResult {
    garch::GarchSpec spec;  // dist carries the fitted nu / lambda
    garch::GarchParams params;
    double loglik = 0.0;
    double bic = 0.0;
    std::size_t n_obs = 0;
    int k = 0;
    bool converged = false;
    int iterations = 0;
    double margin = 0.0;

    std::vector<std::string> names;
    std::vector<double> estimates;
    std::vector<double> std_errors;
    std::vector<double> p_values;
    bool std_errors_available = false;
    std::string diagnostic;

    /// Index of a named parameter, or nullopt if the model has no such parameter.
    [[nodiscard]] std::optional<std::size_t> index_of(std::string_view name) const;
};

/// Bijection between the constrained parameters of a spec and an
/// unconstrained vector used by the optimizer:
///   omega -> exp (egarch: identity); (alpha, [alpha+gamma], beta) -> softmax
///   onto the stationarity simplex (egarch: beta -> tanh); nu -> 2 + exp;
///   lambda -> tanh.
class ParamTransform {
public:
    ParamTransform(const garch::GarchSpec& spec, double margin);

    [[nodiscard]] std::size_t size() const noexcept { return names_.size(); }
    [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }

    /// Natural parameters from the unconstrained vector. The returned spec
    /// carries the shape parameters.
    [[nodiscard]] std::pair<garch::GarchParams, garch::GarchSpec> to_model(std::span<const double> theta) const;
    /// Natural parameters as a flat vector aligned with names().
    [[nodiscard]] std::vector<double> to_natural(std::span<const double> theta) const;
    /// Inverse map. Requires a strictly feasible point.
    [[nodiscard]] std::vector<double> to_theta(const garch::GarchParams& params, const dist::InnovationDist& d) const;

private:
    garch::GarchSpec spec_;
    double scale_;  // 1 - margin
    std::vector<std::string> names_;
};

/// BIC = -2 loglik + ln(n) k.
[[nodiscard]] double bic(double loglik, std::size_t n, int k);

/// Two-sided normal tail probability of estimate / std_error.
[[nodiscard]] double p_value(double estimate, double std_error);

/// Deterministic starting point for a spec on the given returns.
[[nodiscard]] std::pair<garch::GarchParams, dist::InnovationDist> starting_point(const garch::GarchSpec& spec,
                                                                                std::span<const double> returns);

/// Maximizes the log-likelihood. The spec's dist selects the innovation
/// family; its nu/lambda are ignored and estimated. Throws InvalidArgument
/// for short or zero-variance input. A run that hits the iteration limit is
/// returned with converged = false.
[[nodiscard]] FitResult fit(const garch::GarchSpec& spec, std::span<const double> returns,
                            const FitOptions& options = {});

/// Fills std_errors / p_values from the numerical Hessian of the
/// log-likelihood in transformed space (central differences,
/// h = max(1e-4, 1e-4 |theta|)), mapped back by the delta method.
[[nodiscard]] FitResult infer(FitResult fit, std::span<const double> returns,
                              const FitOptions& options = {});

struct OrderCandidate {
    int p = 1;
    int q = 1;
    std::optional<double> bic;
    std::string status;  // "ok", "unsupported order", or a fit diagnostic
};

struct OrderSelection {
    int p = 1;
    int q = 1;
    std::vector<OrderCandidate> table;
};

/// Minimal-BIC candidate; ties go to smaller p + q, then smaller p.
/// Throws InvalidArgument if no candidate has a BIC.
[[nodiscard]] OrderCandidate pick_best(std::span<const OrderCandidate> table);

/// Fits every grid point (only p = q = 1 is estimable; other entries are
/// marked "unsupported order") and returns the BIC-optimal order.
[[nodiscard]] OrderSelection select_order(std::span<const double> returns, garch::Family family,
                                          dist::Kind dist_kind, std::span<const int> p_grid,
                                          std::span<const int> q_grid, const FitOptions& options = {});

}  // namespace vlab::estimation

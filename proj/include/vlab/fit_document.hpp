#pragma once

#include "vlab/estimation.hpp"

#include <filesystem>
#include <iosfwd>

namespace vlab::estimation {

/// Version written in the `version=` line of fit documents.
inline constexpr int kFitDocumentVersion = 1;

/// Writes a FitResult as `key=value` lines: family, dist, mu, omega, alpha,
/// gamma, beta, nu, lambda, loglik, bic, n_obs, k, converged, iterations,
/// margin, then stderr.<name> and p.<name> for each free parameter.
/// Doubles are printed with 17 significant digits so reading back is exact.
void write_fit_document(std::ostream& out, const FitResult& fit);
void save_fit_document(const std::filesystem::path& path, const FitResult& fit);

/// Parses a document produced by write_fit_document. Throws DataError.
[[nodiscard]] FitResult read_fit_document(std::istream& in);
[[nodiscard]] FitResult load_fit_document(const std::filesystem::path& path);

}  // namespace vlab::estimation

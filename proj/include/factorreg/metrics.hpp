#pragma once

#include "factorreg/types.hpp"

namespace factorreg::metrics {

/// Distance between the column spaces of two orthonormal p x r bases:
/// sqrt(1 - tr(H1 H1' H2 H2') / r), in [0, 1].
double distance_d(const OrthonormalBasis& h1, const OrthonormalBasis& h2);

/// Generalized distance for full-column-rank H1 (p x r1) and H2 (p x r2),
/// built from the orthogonal projectors onto each span and normalized by
/// max(r1, r2). Throws RankError if either input is rank deficient.
double distance_dbar(const Matrix& h1, const Matrix& h2);

/// Root mean squared discrepancy between the estimated common component
/// Ahat x_t and the true one L1 f_t, averaged over T and p.
double factor_rmse(const Matrix& ahat, const SeriesMatrix& xhat, const Matrix& l1,
                   const SeriesMatrix& f);
double factor_rmse(const Matrix& ahat, const Matrix& xhat, const Matrix& l1, const Matrix& f);

/// Mean over forecast origins of ||yhat - y||_2 / sqrt(p).
double forecast_error(const Matrix& yhat, const Matrix& y);

}  // namespace factorreg::metrics

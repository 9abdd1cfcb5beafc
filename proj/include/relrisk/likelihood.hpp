#pragma once

#include <utility>
#include <vector>

#include "relrisk/param_map.hpp"

namespace relrisk {

struct InferenceResult {
    Matrix vcov;      // {n * info}^{-1}
    Vector se;        // sqrt(diag(vcov))
    Vector ci_lower;  // estimate - z * se
    Vector ci_upper;
    Matrix info;  // average per-unit score outer product
    double level = 0.95;
};

/// Standard normal quantile (lower tail), accurate to machine precision.
double normal_quantile(double p);

// --- Monotone model -----------------------------------------------------------

double loglik_monotone(const MonotoneParams& params, const Dataset& ds);

/// Analytic score, summed over units: (d/d gamma, d/d beta).
std::pair<Vector, Vector> score_monotone(const MonotoneParams& params, const Dataset& ds);

/// Per-unit score contributions, gamma block first: n x (p_rr + p_op).
Matrix score_rows_monotone(const MonotoneParams& params, const Dataset& ds);

// --- Generalized-odds-product model --------------------------------------------

double loglik_gop(const GopParams& params, const Dataset& ds);

/// Analytic score blocks: d/d alpha_1, ..., d/d alpha_K, then d/d beta.
std::vector<Vector> score_gop(const GopParams& params, const Dataset& ds);

/// Per-unit score contributions, alpha blocks then beta: n x (K*p_rr + p_op).
Matrix score_rows_gop(const GopParams& params, const Dataset& ds);

// --- Information and Wald intervals ---------------------------------------------

/// Empirical Fisher information: average of per-unit score outer products.
Matrix fisher_information(const Matrix& score_rows);

InferenceResult wald(const Vector& estimates, const Matrix& info, std::size_t n,
                     double level = 0.95);

namespace detail {

// Precomputed pieces shared across likelihood evaluations of one dataset.
struct MonotoneWork {
    Vector u;           // f(z_i) - f(z_min)
    double span = 1.0;  // f(z_max) - f(z_min)
};
MonotoneWork monotone_work(const Dataset& ds, const TreatmentCoding& coding);

/// Log-likelihood; optionally fills per-unit score rows (resized as needed).
/// Returns -inf when some fitted probability degenerates, so callers can
/// treat the step as rejected.
double monotone_eval(const Vector& gamma, const Vector& beta, const Dataset& ds,
                     const MonotoneWork& work, Matrix* rows_gamma, Matrix* rows_beta);

struct GopWork {
    std::vector<int> level;
    Vector warm_t;  // per-unit root-solver warm starts (NaN = cold)
    Matrix probs;   // n x (K+1), last evaluated level probabilities
};
GopWork gop_work(const Dataset& ds, int K);

double gop_eval(const std::vector<Vector>& alphas, const Vector& beta, const Dataset& ds,
                GopWork& work, std::vector<Matrix>* rows_alpha, Matrix* rows_beta);

}  // namespace detail

}  // namespace relrisk

#pragma once

#include <utility>

#include "relrisk/data.hpp"
#include "relrisk/types.hpp"

namespace relrisk {

// ---------------------------------------------------------------------------
// Monotone parameterization: (log relative risk, log odds product at the
// treatment-range endpoints) <-> probabilities.
// ---------------------------------------------------------------------------
struct MonotoneParams {
    Vector gamma;  // relative-risk coefficients, log rr(z0,z;v) = gamma'v (f(z)-f(z0))
    Vector beta;   // nuisance coefficients, log op(z_min,z_max;v) = beta'v
    TreatmentCoding coding;
};

/// Discriminant of the endpoint-probability quadratic,
///   Delta = e^{2g}(e^{h1-h2}+1)^2 + 4 e^{h1-h2+g}(1-e^{g}),
/// evaluated in the cancellation-free equivalent form
///   Delta = e^{2g}(1-e^{h1-h2})^2 + 4 e^{h1-h2+g},
/// with the largest exponent factored out so no intermediate overflows for
/// |h1|,|h2|,|g| <= 700. Always > 0.
double monotone_delta(double h1, double h2, double g);

struct EndpointProbs {
    double p_inf;  // probability at the endpoint where the log-RR equals h1
    double p_sup;  // probability at the endpoint where the log-RR equals h2
};

/// Closed-form endpoint probabilities given h1 = h(z_inf,v), h2 = h(z_sup,v)
/// and g = log OP of the two endpoints. The closed form is symmetric in the
/// two endpoints, so no non-decreasing assumption on h is needed: swapping
/// (h1,h2) swaps the outputs. Outputs are clamped to the largest open
/// interval representable in double, [DBL_MIN, 1-2^-53].
EndpointProbs monotone_endpoint_probs(double h1, double h2, double g);

/// Probability at treatment z for one unit. z must lie in the coding range.
double monotone_prob_at(const MonotoneParams& params, const Vector& v_rr, const Vector& v_op,
                        double z);

// ---------------------------------------------------------------------------
// Generalized-odds-product parameterization for a categorical treatment with
// K+1 levels.
// ---------------------------------------------------------------------------
struct GopParams {
    std::vector<Vector> alphas;  // K vectors, log rr(0,k;v) = alpha_k'x
    Vector beta;                 // log gop(v) = beta'w
};

/// Unique root p0 of
///   f(p0) = (K+1) log p0 + sum_k log c_k - log(1-p0) - sum_k log(1-p0 c_k) - log(gop),
/// where c_k are the K relative risks. f is strictly increasing on the
/// bracket (0, min(1, 1/max c_k)); bisection narrows the bracket, then Newton
/// on the logit scale polishes to |f| < 1e-12.
double gop_solve_p0(const Vector& rr, double gop);

/// All K+1 level probabilities (p0, p0 c_1, ..., p0 c_K) for one unit.
Vector gop_probs(const GopParams& params, const Vector& x, const Vector& w);

/// Inverse map: probabilities -> (log-RR vector of length K, log GOP).
std::pair<Vector, double> probs_to_natural(const Vector& p);

namespace detail {
/// gop_solve_p0 with a warm start on the solver's logit scale; `warm_t`,
/// when finite, seeds the iteration (skipping the bracketing phase, which
/// monotonicity of f makes safe) and is updated with the converged value.
double gop_solve_p0_warm(const Vector& log_rr, double log_gop, double& warm_t);

/// Probability at the h2 endpoint only (cheaper than both endpoints).
double endpoint_prob_sup(double h1, double h2, double g);
}  // namespace detail

}  // namespace relrisk

#include "relrisk/param_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace relrisk {

namespace {

constexpr double kBranchG = 1e-6;  // |g| below this uses the g = 0 limit formula

const double kProbFloor = std::numeric_limits<double>::min();
const double kProbCeil = std::nextafter(1.0, 0.0);

double clamp_prob(double p) { return std::clamp(p, kProbFloor, kProbCeil); }

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw ValidationError(std::string("non-finite input: ") + what);
}

double sigmoid(double t) {
    if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
    double e = std::exp(t);
    return e / (1.0 + e);
}

double log_sigmoid(double t) {
    if (t < -37.0) return t;
    return -std::log1p(std::exp(-t));
}

// Scaled pieces of Delta = e^{2g}(1-e^d)^2 + 4 e^{g+d} with d = h1-h2.
// Returns s and mant with Delta = e^s * mant, both term exponents <= s.
struct ScaledDelta {
    double s;
    double mant;
};

ScaledDelta scaled_delta(double d, double g) {
    const double ad = std::fabs(d);
    const double e1 = 2.0 * g + 2.0 * std::max(0.0, d);
    const double e2 = g + d;
    const double m1 = std::pow(1.0 - std::exp(-ad), 2);
    const double s = std::max(e1, e2);
    const double mant = std::exp(e1 - s) * m1 + 4.0 * std::exp(e2 - s);
    return {s, mant};
}

}  // namespace

namespace detail {

double endpoint_prob_sup(double h1, double h2, double g) {
    // Probability at the h2 endpoint. Rationalized closed form
    //   p = 2 e^g / (e^g (1 + e^d) + sqrt(Delta)),    d = h1 - h2,
    // which is the g != 0 branch of the endpoint solution with the
    // subtraction removed; it tends to 1/(1+e^d) as g -> 0.
    const double d = h1 - h2;
    if (std::fabs(g) < kBranchG) return sigmoid(h2 - h1);
    const double ad = std::fabs(d);
    const auto [s, mant] = scaled_delta(d, g);
    const double m = g + std::max(0.0, d);  // exponent of A = e^g (1 + e^d)
    const double t = std::max(m, 0.5 * s);
    const double denom =
        std::exp(m - t) * (1.0 + std::exp(-ad)) + std::exp(0.5 * s - t) * std::sqrt(mant);
    return 2.0 * std::exp(g - t) / denom;
}

}  // namespace detail

double monotone_delta(double h1, double h2, double g) {
    require_finite(h1, "h1");
    require_finite(h2, "h2");
    require_finite(g, "g");
    const auto [s, mant] = scaled_delta(h1 - h2, g);
    if (s < 700.0) return std::exp(s) * mant;
    const double ld = s + std::log(mant);
    return std::exp(ld);  // +inf only if Delta genuinely exceeds double range
}

EndpointProbs monotone_endpoint_probs(double h1, double h2, double g) {
    require_finite(h1, "h1");
    require_finite(h2, "h2");
    require_finite(g, "g");
    EndpointProbs out;
    out.p_sup = clamp_prob(detail::endpoint_prob_sup(h1, h2, g));
    out.p_inf = clamp_prob(detail::endpoint_prob_sup(h2, h1, g));  // symmetric in the endpoints
    return out;
}

double monotone_prob_at(const MonotoneParams& params, const Vector& v_rr, const Vector& v_op,
                        double z) {
    const TreatmentCoding& c = params.coding;
    require_finite(z, "z");
    if (z < c.z_min || z > c.z_max)
        throw ValidationError("treatment value " + std::to_string(z) + " outside range [" +
                              std::to_string(c.z_min) + ", " + std::to_string(c.z_max) + "]");
    const double theta = params.gamma.dot(v_rr);
    const double g = params.beta.dot(v_op);
    const double u0 = c.transform(c.z0);
    const double u_min = c.transform(c.z_min);
    const double u_max = c.transform(c.z_max);
    const double h1 = theta * (u_min - u0);
    const double h2 = theta * (u_max - u0);
    const double p_sup = detail::endpoint_prob_sup(h1, h2, g);
    const double uz = c.transform(z);
    return clamp_prob(p_sup * std::exp(theta * (uz - u_max)));
}

namespace detail {

double gop_solve_p0_warm(const Vector& log_rr, double log_gop, double& warm_t) {
    const Index K = log_rr.size();
    const double lc_max = log_rr.maxCoeff();
    const double log_u = std::min(0.0, -lc_max);  // upper bracket U = min(1, 1/max c_k)
    const double u = std::exp(log_u);
    const double sum_lc = log_rr.sum();

    double term_scale = std::fabs(log_gop) + 1.0;
    for (Index k = 0; k < K; ++k) term_scale += std::fabs(log_rr[k]);

    // f and df/dt at t (logit scale of p0/U); also reports p0.
    const auto eval = [&](double t, double* dfdt, double* p0_out) {
        const double s = sigmoid(t);
        const double lp0 = log_u + log_sigmoid(t);
        const double p0 = u * s;
        double f = (K + 1) * lp0 + sum_lc - std::log1p(-p0) - log_gop;
        double fp = (K + 1) / p0 + 1.0 / (1.0 - p0);
        for (Index k = 0; k < K; ++k) {
            const double pc = std::exp(lp0 + log_rr[k]);
            f -= std::log1p(-pc);
            fp += std::exp(log_rr[k]) / (1.0 - pc);
        }
        if (dfdt) *dfdt = fp * u * s * (1.0 - s);
        if (p0_out) *p0_out = p0;
        return f;
    };

    const double tol = std::max(1e-13, 8.0 * std::numeric_limits<double>::epsilon() * term_scale);
    const int max_iter = 200;
    int iter = 0;
    double t_lo, t_hi, t;

    if (std::isfinite(warm_t)) {
        // f is strictly increasing with f -> -inf/+inf at the bracket ends, so a
        // wide conceptual bracket is valid without evaluating it; the Newton
        // loop below tightens it as a safeguard.
        t_lo = -1e9;
        t_hi = 1e9;
        t = warm_t;
    } else {
        // Expand to a verified sign-changing bracket, ...
        t_lo = -30.0;
        t_hi = 30.0;
        for (int i = 0; i < 64 && eval(t_lo, nullptr, nullptr) >= 0.0; ++i) t_lo *= 2.0;
        for (int i = 0; i < 64 && eval(t_hi, nullptr, nullptr) <= 0.0; ++i) t_hi *= 2.0;
        if (!(eval(t_lo, nullptr, nullptr) < 0.0 && eval(t_hi, nullptr, nullptr) > 0.0))
            throw SolverError("gop_solve_p0: could not bracket the root");
        // ... then bisect until the bracket is narrow in p0 units.
        while (u * (sigmoid(t_hi) - sigmoid(t_lo)) > 1e-3 && iter < max_iter) {
            const double tm = 0.5 * (t_lo + t_hi);
            if (eval(tm, nullptr, nullptr) > 0.0)
                t_hi = tm;
            else
                t_lo = tm;
            ++iter;
        }
        t = 0.5 * (t_lo + t_hi);
    }

    double p0 = u * sigmoid(t);
    for (; iter < max_iter; ++iter) {
        double dfdt;
        const double f = eval(t, &dfdt, &p0);
        if (f > 0.0)
            t_hi = t;
        else
            t_lo = t;
        if (std::fabs(f) <= tol) break;
        double t_next = t - f / dfdt;
        if (!std::isfinite(t_next) || t_next <= t_lo || t_next >= t_hi)
            t_next = 0.5 * (t_lo + t_hi);
        if (t_next == t) break;  // representable limit
        t = t_next;
    }

    double dfdt;
    const double f = eval(t, &dfdt, &p0);
    if (std::fabs(f) > std::max(1e-12, 64.0 * std::numeric_limits<double>::epsilon() * term_scale))
        throw SolverError("gop_solve_p0: residual " + std::to_string(f) + " after " +
                          std::to_string(max_iter) + " iterations");
    warm_t = t;
    return p0;
}

}  // namespace detail

double gop_solve_p0(const Vector& rr, double gop) {
    if (rr.size() < 1) throw ValidationError("gop_solve_p0: need at least one relative risk");
    for (Index k = 0; k < rr.size(); ++k) {
        require_finite(rr[k], "rr");
        if (rr[k] <= 0.0) throw ValidationError("gop_solve_p0: relative risks must be positive");
    }
    require_finite(gop, "gop");
    if (gop <= 0.0) throw ValidationError("gop_solve_p0: odds product must be positive");
    double warm = std::numeric_limits<double>::quiet_NaN();
    return detail::gop_solve_p0_warm(rr.array().log().matrix(), std::log(gop), warm);
}

Vector gop_probs(const GopParams& params, const Vector& x, const Vector& w) {
    const Index K = static_cast<Index>(params.alphas.size());
    if (K < 1) throw ValidationError("gop_probs: need K >= 1 relative-risk models");
    Vector log_rr(K);
    for (Index k = 0; k < K; ++k) {
        const double t = params.alphas[k].dot(x);
        require_finite(t, "alpha'x");
        if (std::fabs(t) > 700.0)
            throw ValidationError("gop_probs: linear predictor magnitude exceeds 700");
        log_rr[k] = t;
    }
    const double g = params.beta.dot(w);
    require_finite(g, "beta'w");
    if (std::fabs(g) > 700.0)
        throw ValidationError("gop_probs: linear predictor magnitude exceeds 700");

    double warm = std::numeric_limits<double>::quiet_NaN();
    const double p0 = detail::gop_solve_p0_warm(log_rr, g, warm);
    const double lp0 = std::log(p0);
    Vector p(K + 1);
    p[0] = clamp_prob(p0);
    for (Index k = 0; k < K; ++k) p[k + 1] = clamp_prob(std::exp(lp0 + log_rr[k]));
    return p;
}

std::pair<Vector, double> probs_to_natural(const Vector& p) {
    const Index m = p.size();
    if (m < 2) throw ValidationError("probs_to_natural: need at least two probabilities");
    for (Index i = 0; i < m; ++i) {
        require_finite(p[i], "p");
        if (p[i] <= 0.0 || p[i] >= 1.0)
            throw ValidationError("probs_to_natural: probability on the boundary");
    }
    const double lp0 = std::log(p[0]);
    Vector log_rr(m - 1);
    double log_gop = 0.0;
    for (Index i = 0; i < m; ++i) log_gop += std::log(p[i]) - std::log1p(-p[i]);
    for (Index k = 1; k < m; ++k) log_rr[k - 1] = std::log(p[k]) - lp0;
    return {log_rr, log_gop};
}

}  // namespace relrisk

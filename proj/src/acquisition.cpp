#include "rankbo/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rankbo/error.hpp"

namespace rankbo {

namespace {
constexpr double kSigmaFloor = 1e-12;
constexpr double kAsymptoticBelow = -20.0;
}

double normal_pdf(double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double u) { return 0.5 * std::erfc(-u / std::numbers::sqrt2); }

double acq_average_rank(double mu) { return mu; }

double acq_lcb(double mu, double sigma, double beta) {
    if (sigma < 0.0) throw DomainError("acq_lcb: negative sigma");
    if (beta < 0.0) throw DomainError("acq_lcb: beta must be non-negative");
    return mu - beta * sigma;
}

double acq_ei(double mu, double sigma, double mu_best) {
    if (sigma < 0.0) throw DomainError("acq_ei: negative sigma");
    const double gain = mu_best - mu;
    if (sigma < kSigmaFloor) return -std::max(0.0, gain);
    const double u = gain / sigma;
    const double ei = sigma * (u * normal_cdf(u) + normal_pdf(u));
    return -std::max(0.0, ei);
}

double log_expected_improvement(double mu, double sigma, double mu_best) {
    if (sigma < 0.0) throw DomainError("log_expected_improvement: negative sigma");
    const double gain = mu_best - mu;
    if (sigma < kSigmaFloor) return gain > 0.0 ? std::log(gain) : -std::numeric_limits<double>::infinity();
    const double u = gain / sigma;
    if (u >= kAsymptoticBelow) {
        const double ei = sigma * (u * normal_cdf(u) + normal_pdf(u));
        return ei > 0.0 ? std::log(ei) : -std::numeric_limits<double>::infinity();
    }
    // u Phi(u) + phi(u) = phi(u) / u^2 * (1 - 3/u^2 + 15/u^4 - 105/u^6 + ...)
    const double v = 1.0 / (u * u);
    const double series = v * (-3.0 + v * (15.0 + v * (-105.0 + v * 945.0)));
    return std::log(sigma) - 0.5 * u * u - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(v) + std::log1p(series);
}

std::vector<double> evaluate_acquisition(const Acquisition& acq, std::span<const double> mu,
                                         std::span<const double> sigma, double mu_best) {
    if (mu.size() != sigma.size()) throw ShapeError("evaluate_acquisition: mu and sigma lengths differ");
    std::vector<double> alpha(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        switch (acq.kind) {
            case AcqKind::average_rank: alpha[i] = acq_average_rank(mu[i]); break;
            case AcqKind::lcb: alpha[i] = acq_lcb(mu[i], sigma[i], acq.beta); break;
            case AcqKind::expected_improvement: alpha[i] = acq_ei(mu[i], sigma[i], mu_best); break;
        }
    }
    return alpha;
}

std::size_t select_next(std::span<const double> alphas) {
    if (alphas.empty()) throw ExhaustedPoolError("select_next: no pending candidates");
    std::size_t best = 0;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (!std::isfinite(alphas[i])) throw NumericError("select_next: non-finite acquisition value");
        if (alphas[i] < alphas[best]) best = i;
    }
    return best;
}

std::size_t select_candidate(const Acquisition& acq, std::span<const double> mu, std::span<const double> sigma,
                             double mu_best) {
    if (acq.kind != AcqKind::expected_improvement) return select_next(evaluate_acquisition(acq, mu, sigma, mu_best));
    if (mu.size() != sigma.size()) throw ShapeError("select_candidate: mu and sigma lengths differ");
    if (mu.empty()) throw ExhaustedPoolError("select_candidate: no pending candidates");
    std::size_t best = 0;
    double best_log = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (!std::isfinite(mu[i]) || !std::isfinite(sigma[i]))
            throw NumericError("select_candidate: non-finite prediction");
        const double l = log_expected_improvement(mu[i], sigma[i], mu_best);
        if (l > best_log) {
            best_log = l;
            best = i;
        }
    }
    return best;
}

std::string to_string(AcqKind kind) {
    switch (kind) {
        case AcqKind::average_rank: return "avg";
        case AcqKind::lcb: return "lcb";
        case AcqKind::expected_improvement: return "ei";
    }
    return "?";
}

AcqKind parse_acq_kind(const std::string& name) {
    if (name == "avg") return AcqKind::average_rank;
    if (name == "lcb") return AcqKind::lcb;
    if (name == "ei") return AcqKind::expected_improvement;
    throw ConfigError("unknown acquisition '" + name + "' (expected avg, lcb, ei)");
}

}  // namespace rankbo

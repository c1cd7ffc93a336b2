#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rankbo {

enum class AcqKind { average_rank, lcb, expected_improvement };

/// Acquisition over rank-space predictions. Lower alpha is better; the next
/// candidate is the argmin.
struct Acquisition {
    AcqKind kind = AcqKind::expected_improvement;
    double beta = 1.0;
};

double normal_pdf(double u);
double normal_cdf(double u);

double acq_average_rank(double mu);
double acq_lcb(double mu, double sigma, double beta);

/// Negated expected rank improvement over the incumbent's mean rank:
///   -( (mu_best - mu) Phi(u) + sigma phi(u) ),  u = (mu_best - mu) / sigma.
/// sigma below 1e-12 uses the limit -max(0, mu_best - mu).
double acq_ei(double mu, double sigma, double mu_best);

/// log of the expected improvement (-inf when it is exactly zero). Stays
/// finite where the EI itself underflows, for u below about -38.
double log_expected_improvement(double mu, double sigma, double mu_best);

std::vector<double> evaluate_acquisition(const Acquisition& acq, std::span<const double> mu,
                                         std::span<const double> sigma, double mu_best);

/// Index of the smallest alpha; ties go to the smallest index.
std::size_t select_next(std::span<const double> alphas);

/// argmin of the acquisition over pending candidates, smallest index on ties.
/// EI is compared through log_expected_improvement, which orders candidates
/// exactly like alpha but does not collapse to ties when EI underflows.
std::size_t select_candidate(const Acquisition& acq, std::span<const double> mu, std::span<const double> sigma,
                             double mu_best);

std::string to_string(AcqKind kind);
AcqKind parse_acq_kind(const std::string& name);

}  // namespace rankbo

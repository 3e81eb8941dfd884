#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "basisgen/coefficients.hpp"
#include "basisgen/linalg.hpp"

namespace basisgen {

enum class CovarianceType { Full, Diagonal };

std::string_view to_string(CovarianceType type);
CovarianceType parse_covariance_type(std::string_view text);

/// Gaussian mixture p(x) = sum_k pi_k N(x; mu_k, Sigma_k).
struct GmmModel {
    CovarianceType covariance_type = CovarianceType::Full;
    Vector weights;                   // K
    Matrix means;                     // K x d, one component per row
    std::vector<Matrix> covariances;  // Full: d x d each; Diagonal: d x 1 variances
    double reg = 0.0;                 // ridge used while fitting
    std::vector<double> fit_log;      // objective per EM iteration (see fit_em)
    std::size_t iterations = 0;
    bool converged = false;

    std::size_t k() const noexcept { return static_cast<std::size_t>(weights.size()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(means.cols()); }

    /// Checks shapes, the weight simplex and positive-definiteness.
    void validate() const;
};

struct EmOptions {
    std::size_t k = 1;
    CovarianceType covariance_type = CovarianceType::Full;
    /// Covariance ridge; unset means 1e-6 * trace(cov(X)) / d.
    std::optional<double> reg;
    std::uint64_t seed = 0;
    std::size_t max_iter = 500;
    double tol = 1e-5;
    /// Lloyd refinement steps after k-means++ seeding.
    std::size_t kmeans_iterations = 10;
};

/// Default ridge 1e-6 * trace(cov(X)) / d (falls back to 1e-6 for constant data).
double default_regularization(const Eigen::Ref<const RowMatrix>& x);

/// EM from a k-means++ start, responsibilities in log space.
///
/// The ridge enters as a fixed penalty -(reg N / 2) sum_k tr(Sigma_k^{-1}),
/// which makes the covariance update Sigma_k = S_k + reg (N / N_k) I. For K = 1
/// this is exactly the sample covariance plus reg I. fit_log records the mean
/// penalised log-likelihood, which EM never decreases.
GmmModel fit_em(const CoefficientMatrix& x, const EmOptions& options);
GmmModel fit_em(const Eigen::Ref<const RowMatrix>& x, const EmOptions& options);

/// Precomputed Cholesky factors for repeated density evaluation.
class GmmEvaluator {
public:
    explicit GmmEvaluator(const GmmModel& model);

    double logpdf(const Eigen::Ref<const Vector>& x) const;
    /// log p(x_i) for every row.
    Vector logpdf_rows(const Eigen::Ref<const RowMatrix>& x) const;
    /// Per-component log(pi_k N(x_i; k)), N x K.
    Matrix log_joint(const Eigen::Ref<const RowMatrix>& x) const;

    const GmmModel& model() const noexcept { return model_; }
    const Matrix& cholesky(std::size_t component) const { return factors_[component]; }

private:
    const GmmModel& model_;
    std::vector<Matrix> factors_;  // lower Cholesky (Full) or std devs (Diagonal)
    Vector log_norm_;              // log pi_k - 0.5 (d log 2 pi + log det Sigma_k)
};

double gmm_logpdf(const GmmModel& model, const Eigen::Ref<const Vector>& x);
double gmm_mean_nll(const GmmModel& model, const Eigen::Ref<const RowMatrix>& x);

CoefficientMatrix gmm_sample(const GmmModel& model, std::size_t n, std::uint64_t seed);

/// log(sum(exp(v))) without overflow; -inf for an all -inf input.
double log_sum_exp(const Eigen::Ref<const Vector>& v);

}  // namespace basisgen

#include "basisgen/gmm.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "basisgen/error.hpp"

namespace basisgen {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

// Components whose responsibility mass drops below this are frozen.
constexpr double kDeadComponentMass = 1e-8;

Matrix kmeans_plus_plus(const RowMatrix& x, std::size_t k, std::mt19937_64& rng) {
    const Eigen::Index n = x.rows();
    Matrix centers(static_cast<Eigen::Index>(k), x.cols());
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    centers.row(0) = x.row(pick(rng));
    Vector dist2 = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t c = 1; c < k; ++c) {
        const double total = dist2.sum();
        Eigen::Index chosen = 0;
        if (total > 0.0) {
            double target = unit(rng) * total;
            chosen = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                target -= dist2(i);
                if (target <= 0.0) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = pick(rng);
        }
        const auto row = static_cast<Eigen::Index>(c);
        centers.row(row) = x.row(chosen);
        dist2 = dist2.cwiseMin((x.rowwise() - centers.row(row)).rowwise().squaredNorm());
    }
    return centers;
}

std::vector<Eigen::Index> assign_nearest(const RowMatrix& x, const Matrix& centers) {
    std::vector<Eigen::Index> labels(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        Eigen::Index best = 0;
        (centers.rowwise() - x.row(i)).rowwise().squaredNorm().minCoeff(&best);
        labels[static_cast<std::size_t>(i)] = best;
    }
    return labels;
}

Matrix covariance_of(const RowMatrix& x, const Eigen::RowVectorXd& mean, CovarianceType type) {
    const RowMatrix centred = x.rowwise() - mean;
    const double inv_n = 1.0 / static_cast<double>(x.rows());
    if (type == CovarianceType::Diagonal) {
        return (centred.array().square().colwise().sum() * inv_n).transpose().matrix();
    }
    return (centred.transpose() * centred) * inv_n;
}

void add_ridge(Matrix& cov, CovarianceType type, double ridge) {
    if (type == CovarianceType::Diagonal) {
        cov.array() += ridge;
    } else {
        cov.diagonal().array() += ridge;
    }
}

double inverse_trace(const Matrix& factor, CovarianceType type) {
    if (type == CovarianceType::Diagonal) {
        return factor.array().square().inverse().sum();
    }
    const Eigen::Index d = factor.rows();
    const Matrix inv_l = factor.triangularView<Eigen::Lower>().solve(Matrix::Identity(d, d));
    return inv_l.squaredNorm();
}

}  // namespace

std::string_view to_string(CovarianceType type) {
    return type == CovarianceType::Full ? "full" : "diag";
}

CovarianceType parse_covariance_type(std::string_view text) {
    if (text == "full") return CovarianceType::Full;
    if (text == "diag" || text == "diagonal") return CovarianceType::Diagonal;
    fail(ErrorKind::Config, "unknown covariance type '" + std::string(text) + "'");
}

double log_sum_exp(const Eigen::Ref<const Vector>& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) {
        return m;
    }
    return m + std::log((v.array() - m).exp().sum());
}

void GmmModel::validate() const {
    const Eigen::Index kk = weights.size();
    require(kk >= 1, ErrorKind::Dimension, "GMM needs at least one component");
    require(means.rows() == kk && static_cast<Eigen::Index>(covariances.size()) == kk, ErrorKind::Dimension,
            "GMM component arrays disagree on K");
    require((weights.array() >= 0.0).all() && std::abs(weights.sum() - 1.0) <= 1e-12, ErrorKind::Domain,
            "GMM weights are not on the simplex");
    const Eigen::Index d = means.cols();
    for (Eigen::Index c = 0; c < kk; ++c) {
        const Matrix& cov = covariances[static_cast<std::size_t>(c)];
        if (covariance_type == CovarianceType::Diagonal) {
            require(cov.rows() == d && cov.cols() == 1, ErrorKind::Dimension, "diagonal covariance shape");
            require((cov.array() > 0.0).all() && cov.allFinite(), ErrorKind::Numerical,
                    "component " + std::to_string(c) + " has a non-positive variance");
        } else {
            require(cov.rows() == d && cov.cols() == d, ErrorKind::Dimension, "full covariance shape");
            Eigen::LLT<Matrix> llt(cov);
            require(llt.info() == Eigen::Success && cov.allFinite(), ErrorKind::Numerical,
                    "component " + std::to_string(c) + " covariance is not positive definite");
        }
    }
}

GmmEvaluator::GmmEvaluator(const GmmModel& model) : model_(model) {
    const std::size_t k = model.k();
    const auto d = static_cast<double>(model.dim());
    factors_.resize(k);
    log_norm_.resize(static_cast<Eigen::Index>(k));
    for (std::size_t c = 0; c < k; ++c) {
        const Matrix& cov = model.covariances[c];
        double log_det = 0.0;
        if (model.covariance_type == CovarianceType::Diagonal) {
            if (!((cov.array() > 0.0).all())) {
                fail(ErrorKind::Numerical, "component " + std::to_string(c) + " has a non-positive variance");
            }
            factors_[c] = cov.cwiseSqrt();
            log_det = cov.array().log().sum();
        } else {
            Eigen::LLT<Matrix> llt(cov);
            if (llt.info() != Eigen::Success) {
                fail(ErrorKind::Numerical,
                     "component " + std::to_string(c) + " covariance collapsed (Cholesky failed)");
            }
            factors_[c] = llt.matrixL();
            log_det = 2.0 * factors_[c].diagonal().array().log().sum();
        }
        log_norm_(static_cast<Eigen::Index>(c)) =
            std::log(model.weights(static_cast<Eigen::Index>(c))) - 0.5 * (d * kLog2Pi + log_det);
    }
}

Matrix GmmEvaluator::log_joint(const Eigen::Ref<const RowMatrix>& x) const {
    require(static_cast<std::size_t>(x.cols()) == model_.dim(), ErrorKind::Dimension,
            "GMM dimension " + std::to_string(model_.dim()) + " does not match input dimension " +
                std::to_string(x.cols()));
    const Eigen::Index n = x.rows();
    const auto k = static_cast<Eigen::Index>(model_.k());
    Matrix out(n, k);
    for (Eigen::Index c = 0; c < k; ++c) {
        const auto cu = static_cast<std::size_t>(c);
        const Eigen::RowVectorXd mu = model_.means.row(c);
        Vector maha;
        if (model_.covariance_type == CovarianceType::Diagonal) {
            const Eigen::RowVectorXd inv_sd = factors_[cu].transpose().cwiseInverse();
            maha = ((x.rowwise() - mu).array().rowwise() * inv_sd.array()).square().rowwise().sum();
        } else {
            const Matrix centred_t = (x.rowwise() - mu).transpose();
            const Matrix solved = factors_[cu].triangularView<Eigen::Lower>().solve(centred_t);
            maha = solved.colwise().squaredNorm().transpose();
        }
        out.col(c) = (log_norm_(c) - 0.5 * maha.array()).matrix();
    }
    return out;
}

Vector GmmEvaluator::logpdf_rows(const Eigen::Ref<const RowMatrix>& x) const {
    const Matrix joint = log_joint(x);
    Vector out(joint.rows());
    for (Eigen::Index i = 0; i < joint.rows(); ++i) {
        out(i) = log_sum_exp(joint.row(i).transpose());
    }
    return out;
}

double GmmEvaluator::logpdf(const Eigen::Ref<const Vector>& x) const {
    const RowMatrix row = x.transpose();
    return logpdf_rows(row)(0);
}

double gmm_logpdf(const GmmModel& model, const Eigen::Ref<const Vector>& x) {
    return GmmEvaluator(model).logpdf(x);
}

double gmm_mean_nll(const GmmModel& model, const Eigen::Ref<const RowMatrix>& x) {
    require(x.rows() > 0, ErrorKind::Degenerate, "mean NLL of an empty sample set");
    return -GmmEvaluator(model).logpdf_rows(x).mean();
}

double default_regularization(const Eigen::Ref<const RowMatrix>& x) {
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const double trace = (x.rowwise() - mean).array().square().sum() / static_cast<double>(x.rows());
    const double reg = 1e-6 * trace / static_cast<double>(x.cols());
    return reg > 0.0 ? reg : 1e-6;
}

GmmModel fit_em(const CoefficientMatrix& x, const EmOptions& options) {
    x.validate();
    return fit_em(x.values, options);
}

GmmModel fit_em(const Eigen::Ref<const RowMatrix>& xin, const EmOptions& options) {
    const RowMatrix x = xin;
    const auto n = static_cast<std::size_t>(x.rows());
    const std::size_t k = options.k;
    const Eigen::Index d = x.cols();
    require(k >= 1, ErrorKind::Config, "GMM needs at least one component");
    require(n > k, ErrorKind::Config,
            "GMM with K=" + std::to_string(k) + " needs more than K samples (got " + std::to_string(n) + ")");
    require(d >= 1, ErrorKind::Dimension, "GMM input has zero dimensions");
    require(options.tol > 0.0 && options.max_iter >= 1, ErrorKind::Config, "invalid EM stopping rule");
    if (!x.allFinite()) {
        fail(ErrorKind::Domain, "GMM input contains non-finite values");
    }

    const CovarianceType type = options.covariance_type;
    const double reg = options.reg.value_or(default_regularization(x));
    require(reg > 0.0, ErrorKind::Config, "covariance ridge must be positive");
    const double n_d = static_cast<double>(n);
    const auto kk = static_cast<Eigen::Index>(k);

    GmmModel model;
    model.covariance_type = type;
    model.reg = reg;

    // k-means++ seeding, a few Lloyd steps, then a shared global covariance.
    std::mt19937_64 rng(options.seed);
    Matrix centers = kmeans_plus_plus(x, k, rng);
    std::vector<Eigen::Index> labels = assign_nearest(x, centers);
    for (std::size_t it = 0; it < options.kmeans_iterations && k > 1; ++it) {
        Matrix sums = Matrix::Zero(kk, d);
        Vector counts = Vector::Zero(kk);
        for (std::size_t i = 0; i < n; ++i) {
            sums.row(labels[i]) += x.row(static_cast<Eigen::Index>(i));
            counts(labels[i]) += 1.0;
        }
        for (Eigen::Index c = 0; c < kk; ++c) {
            if (counts(c) > 0.0) centers.row(c) = sums.row(c) / counts(c);
        }
        auto next = assign_nearest(x, centers);
        if (next == labels) break;
        labels = std::move(next);
    }
    Vector counts = Vector::Zero(kk);
    for (auto label : labels) counts(label) += 1.0;
    model.weights = (counts.array() + 1.0).matrix() / (n_d + static_cast<double>(k));
    model.means = centers;
    Matrix global = covariance_of(x, x.colwise().mean(), type);
    add_ridge(global, type, reg);
    model.covariances.assign(k, global);

    auto objective = [&](const GmmModel& m, Matrix& resp) {
        GmmEvaluator eval(m);
        resp = eval.log_joint(x);
        double ll = 0.0;
        for (Eigen::Index i = 0; i < resp.rows(); ++i) {
            const double lse = log_sum_exp(resp.row(i).transpose());
            ll += lse;
            resp.row(i) = (resp.row(i).array() - lse).exp();
        }
        double penalty = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            penalty += inverse_trace(eval.cholesky(c), type);
        }
        return ll / n_d - 0.5 * reg * penalty;
    };

    Matrix resp;
    double current = objective(model, resp);
    model.fit_log.push_back(current);

    for (std::size_t iter = 1; iter <= options.max_iter; ++iter) {
        const Vector mass = resp.colwise().sum().transpose();
        for (Eigen::Index c = 0; c < kk; ++c) {
            const auto cu = static_cast<std::size_t>(c);
            const double nk = mass(c);
            if (!std::isfinite(nk)) {
                fail(ErrorKind::Numerical, "component " + std::to_string(c) + " has non-finite responsibility mass");
            }
            if (nk < kDeadComponentMass) {
                // empty component: keep its parameters, weight follows the mass
                continue;
            }
            const Eigen::RowVectorXd mu = (resp.col(c).transpose() * x) / nk;
            const RowMatrix centred = x.rowwise() - mu;
            Matrix cov;
            if (type == CovarianceType::Diagonal) {
                cov = (centred.array().square().colwise() * resp.col(c).array()).colwise().sum().transpose() / nk;
            } else {
                cov = (centred.transpose() * resp.col(c).asDiagonal() * centred) / nk;
                cov = 0.5 * (cov + cov.transpose());
            }
            add_ridge(cov, type, reg * n_d / nk);
            model.means.row(c) = mu;
            model.covariances[cu] = std::move(cov);
        }
        model.weights = mass / mass.sum();
        for (std::size_t c = 0; c < k; ++c) {
            if (type == CovarianceType::Full) {
                Eigen::LLT<Matrix> llt(model.covariances[c]);
                if (llt.info() != Eigen::Success) {
                    fail(ErrorKind::Numerical,
                         "component " + std::to_string(c) + " covariance collapsed despite ridge " +
                             std::to_string(reg));
                }
            }
        }

        const double next = objective(model, resp);
        if (!std::isfinite(next)) {
            fail(ErrorKind::Numerical, "EM objective became non-finite at iteration " + std::to_string(iter));
        }
        model.fit_log.push_back(next);
        model.iterations = iter;
        if (next - current < options.tol) {
            model.converged = true;
            break;
        }
        current = next;
    }
    return model;
}

CoefficientMatrix gmm_sample(const GmmModel& model, std::size_t n, std::uint64_t seed) {
    const GmmEvaluator eval(model);
    const Eigen::Index d = static_cast<Eigen::Index>(model.dim());
    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> component(model.weights.data(),
                                                      model.weights.data() + model.weights.size());
    std::normal_distribution<double> normal(0.0, 1.0);

    CoefficientMatrix out;
    out.values.resize(static_cast<Eigen::Index>(n), d);
    Vector z(d);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = component(rng);
        for (Eigen::Index j = 0; j < d; ++j) z(j) = normal(rng);
        const Matrix& factor = eval.cholesky(c);
        Vector draw;
        if (model.covariance_type == CovarianceType::Diagonal) {
            draw = factor.cwiseProduct(z);
        } else {
            draw = factor.triangularView<Eigen::Lower>() * z;
        }
        out.values.row(static_cast<Eigen::Index>(i)) =
            model.means.row(static_cast<Eigen::Index>(c)) + draw.transpose();
    }
    return out;
}

}  // namespace basisgen

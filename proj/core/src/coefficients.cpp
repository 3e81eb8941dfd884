#include "basisgen/coefficients.hpp"

#include <cmath>

#include "basisgen/error.hpp"

namespace basisgen {

void CoefficientMatrix::validate() const {
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            if (!std::isfinite(values(i, j))) {
                fail(ErrorKind::Domain, "non-finite coefficient at (" + std::to_string(i) + ", " +
                                            std::to_string(j) + ")");
            }
        }
    }
}

}  // namespace basisgen

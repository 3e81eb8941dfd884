#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>

#include "basisgen/coefficients.hpp"
#include "basisgen/dataset.hpp"
#include "basisgen/linear_basis.hpp"
#include "basisgen/tucker.hpp"

namespace basisgen {

/// Any fitted representation basis. All variants map flattened images
/// (one per row) to coefficient rows and back.
using BasisModel = std::variant<PcaBasis, IcaBasis, TuckerBasis, IdentityBasis>;

/// "pca", "ica", "tucker" or "identity".
std::string_view basis_kind(const BasisModel& basis);
std::size_t input_dim(const BasisModel& basis);
std::size_t coefficient_dim(const BasisModel& basis);

RowMatrix project_rows(const BasisModel& basis, const Eigen::Ref<const RowMatrix>& x);
RowMatrix reconstruct_rows(const BasisModel& basis, const Eigen::Ref<const RowMatrix>& y);

CoefficientMatrix project(const BasisModel& basis, const DatasetTensor& data, std::string basis_id,
                          std::string dataset_id);

/// Reconstructed images carry `domain`, the value domain the basis was fit in.
DatasetTensor reconstruct(const BasisModel& basis, const CoefficientMatrix& coeffs, std::size_t height,
                          std::size_t width, ValueDomain domain);

}  // namespace basisgen

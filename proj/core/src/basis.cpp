#include "basisgen/basis.hpp"

#include "basisgen/error.hpp"

namespace basisgen {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::string_view basis_kind(const BasisModel& basis) {
    return std::visit(overloaded{[](const PcaBasis&) { return std::string_view("pca"); },
                                 [](const IcaBasis&) { return std::string_view("ica"); },
                                 [](const TuckerBasis&) { return std::string_view("tucker"); },
                                 [](const IdentityBasis&) { return std::string_view("identity"); }},
                      basis);
}

std::size_t input_dim(const BasisModel& basis) {
    return std::visit(overloaded{[](const PcaBasis& b) { return b.dim_full; },
                                 [](const IcaBasis& b) { return b.dim_full; },
                                 [](const TuckerBasis& b) { return b.dims[1] * b.dims[2]; },
                                 [](const IdentityBasis& b) { return b.dim; }},
                      basis);
}

std::size_t coefficient_dim(const BasisModel& basis) {
    return std::visit(overloaded{[](const PcaBasis& b) { return b.dim_reduced; },
                                 [](const IcaBasis& b) { return b.dim_reduced; },
                                 [](const TuckerBasis& b) { return b.coefficient_count(); },
                                 [](const IdentityBasis& b) { return b.dim; }},
                      basis);
}

RowMatrix project_rows(const BasisModel& basis, const Eigen::Ref<const RowMatrix>& x) {
    return std::visit(overloaded{[&](const PcaBasis& b) { return pca_project(b, x); },
                                 [&](const IcaBasis& b) { return ica_transform(b, x); },
                                 [&](const TuckerBasis& b) { return tucker_project_rows(b, x); },
                                 [&](const IdentityBasis& b) -> RowMatrix {
                                     require(static_cast<std::size_t>(x.cols()) == b.dim,
                                             ErrorKind::Dimension, "identity basis dimension mismatch");
                                     return x;
                                 }},
                      basis);
}

RowMatrix reconstruct_rows(const BasisModel& basis, const Eigen::Ref<const RowMatrix>& y) {
    return std::visit(overloaded{[&](const PcaBasis& b) { return pca_reconstruct(b, y); },
                                 [&](const IcaBasis& b) { return ica_inverse(b, y); },
                                 [&](const TuckerBasis& b) { return tucker_reconstruct_rows(b, y); },
                                 [&](const IdentityBasis& b) -> RowMatrix {
                                     require(static_cast<std::size_t>(y.cols()) == b.dim,
                                             ErrorKind::Dimension, "identity basis dimension mismatch");
                                     return y;
                                 }},
                      basis);
}

CoefficientMatrix project(const BasisModel& basis, const DatasetTensor& data, std::string basis_id,
                          std::string dataset_id) {
    CoefficientMatrix out;
    out.values = project_rows(basis, data.rows());
    out.basis_id = std::move(basis_id);
    out.dataset_id = std::move(dataset_id);
    return out;
}

DatasetTensor reconstruct(const BasisModel& basis, const CoefficientMatrix& coeffs, std::size_t height,
                          std::size_t width, ValueDomain domain) {
    coeffs.validate();
    require(height * width == input_dim(basis), ErrorKind::Dimension,
            "image shape does not match basis input dimension");
    return DatasetTensor::from_rows(reconstruct_rows(basis, coeffs.values), height, width, domain);
}

}  // namespace basisgen

#pragma once

// HGMC container layout (all integers little-endian):
//
//   offset  size  field
//        0     4  magic "HGMC"
//        4     2  version (u16), currently 1
//        6     1  kind (u8): 1 coefficient matrix, 2 matrix, 3 vector
//        7     8  rows (u64)
//       15     8  cols (u64)
//       23  r*c*8 payload, f64 row-major
//      ...        metadata, UTF-8 "key=value\n" lines up to end of file

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "basisgen/coefficients.hpp"
#include "basisgen/linalg.hpp"

namespace basisgen {

enum class ContainerKind : std::uint8_t { CoefficientMatrix = 1, Matrix = 2, Vector = 3 };

std::string_view to_string(ContainerKind kind);

inline constexpr std::uint16_t kContainerVersion = 1;
inline constexpr std::size_t kContainerHeaderSize = 23;

struct Container {
    ContainerKind kind = ContainerKind::Matrix;
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    std::vector<double> payload;  // rows * cols, row-major
    std::map<std::string, std::string> metadata;
};

std::string encode(const Container& c);
/// Magic or version mismatch and malformed metadata are format errors; a
/// short payload is an I/O (truncation) error.
Container decode(std::string_view bytes);

void write_container(const Container& c, const std::filesystem::path& path);
Container read_container(const std::filesystem::path& path);

/// basis_id and dataset_id travel as metadata keys alongside m.metadata.
void write_coeffs(const CoefficientMatrix& m, const std::filesystem::path& path);
/// Non-finite payload values are read as-is; call validate() to reject them.
CoefficientMatrix read_coeffs(const std::filesystem::path& path);

void write_matrix(const Matrix& m, const std::filesystem::path& path,
                  const std::map<std::string, std::string>& metadata = {});
Matrix read_matrix(const std::filesystem::path& path, std::map<std::string, std::string>* metadata = nullptr);

void write_vector(const Vector& v, const std::filesystem::path& path,
                  const std::map<std::string, std::string>& metadata = {});
Vector read_vector(const std::filesystem::path& path, std::map<std::string, std::string>* metadata = nullptr);

std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and renames it into place.
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace basisgen

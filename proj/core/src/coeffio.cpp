#include "basisgen/coeffio.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "basisgen/error.hpp"
#include "basisgen/text.hpp"

namespace basisgen {

namespace {

constexpr char kMagic[4] = {'H', 'G', 'M', 'C'};
constexpr std::uint64_t kMaxPayloadBytes = std::uint64_t{1} << 63;

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
        v = (v << 8) | p[i];
    }
    return v;
}

std::uint64_t payload_bytes(std::uint64_t rows, std::uint64_t cols) {
    if (rows != 0 && cols > kMaxPayloadBytes / 8 / rows) {
        fail(ErrorKind::Format, "container dimensions " + std::to_string(rows) + " x " + std::to_string(cols) +
                                    " overflow the payload size limit");
    }
    return rows * cols * 8;
}

void check_metadata(const std::map<std::string, std::string>& metadata) {
    for (const auto& [key, value] : metadata) {
        require(!key.empty() && key.front() != '#' && key.find_first_of("=\n\r") == std::string::npos,
                ErrorKind::Format, "invalid metadata key '" + key + "'");
        require(value.find_first_of("\n\r") == std::string::npos, ErrorKind::Format,
                "metadata value for '" + key + "' contains a line break");
    }
}

Container expect_kind(Container c, ContainerKind kind, const std::filesystem::path& path) {
    if (c.kind != kind) {
        fail(ErrorKind::Format, path.string() + ": expected a " + std::string(to_string(kind)) +
                                    " container, found " + std::string(to_string(c.kind)));
    }
    return c;
}

}  // namespace

std::string_view to_string(ContainerKind kind) {
    switch (kind) {
        case ContainerKind::CoefficientMatrix:
            return "coefficient-matrix";
        case ContainerKind::Matrix:
            return "matrix";
        case ContainerKind::Vector:
            return "vector";
    }
    return "unknown";
}

std::string encode(const Container& c) {
    const std::uint64_t bytes = payload_bytes(c.rows, c.cols);
    require(c.payload.size() * 8 == bytes, ErrorKind::Dimension,
            "payload holds " + std::to_string(c.payload.size()) + " values for a " + std::to_string(c.rows) +
                " x " + std::to_string(c.cols) + " container");
    require(c.kind != ContainerKind::Vector || c.cols == 1, ErrorKind::Dimension, "vector containers have one column");
    check_metadata(c.metadata);

    std::string out;
    out.reserve(kContainerHeaderSize + bytes);
    out.append(kMagic, 4);
    out.push_back(static_cast<char>(kContainerVersion & 0xFF));
    out.push_back(static_cast<char>(kContainerVersion >> 8));
    out.push_back(static_cast<char>(c.kind));
    put_u64(out, c.rows);
    put_u64(out, c.cols);
    for (double v : c.payload) {
        put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
    out += format_key_values(c.metadata);
    return out;
}

Container decode(std::string_view bytes) {
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < 4) {
        fail(ErrorKind::Io, "truncated container: " + std::to_string(bytes.size()) + " bytes");
    }
    if (std::memcmp(p, kMagic, 4) != 0) {
        fail(ErrorKind::Format, "bad magic, not an HGMC container");
    }
    if (bytes.size() < kContainerHeaderSize) {
        fail(ErrorKind::Io, "truncated container header");
    }
    const auto version = static_cast<std::uint16_t>(p[4] | (p[5] << 8));
    if (version != kContainerVersion) {
        fail(ErrorKind::Format, "unsupported container version " + std::to_string(version) + " (this build reads " +
                                    std::to_string(kContainerVersion) + ")");
    }
    Container c;
    const unsigned kind = p[6];
    if (kind < 1 || kind > 3) {
        fail(ErrorKind::Format, "unknown container kind " + std::to_string(kind));
    }
    c.kind = static_cast<ContainerKind>(kind);
    c.rows = get_u64(p + 7);
    c.cols = get_u64(p + 15);
    const std::uint64_t nbytes = payload_bytes(c.rows, c.cols);
    if (bytes.size() - kContainerHeaderSize < nbytes) {
        fail(ErrorKind::Io, "truncated payload: expected " + std::to_string(nbytes) + " bytes, found " +
                                std::to_string(bytes.size() - kContainerHeaderSize));
    }
    if (c.kind == ContainerKind::Vector && c.cols != 1) {
        fail(ErrorKind::Format, "vector container with " + std::to_string(c.cols) + " columns");
    }
    c.payload.resize(static_cast<std::size_t>(c.rows * c.cols));
    const unsigned char* q = p + kContainerHeaderSize;
    for (auto& v : c.payload) {
        v = std::bit_cast<double>(get_u64(q));
        q += 8;
    }
    c.metadata = parse_key_values(bytes.substr(static_cast<std::size_t>(kContainerHeaderSize + nbytes)));
    return c;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorKind::Io, "cannot open " + path.string());
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        fail(ErrorKind::Io, "read error on " + path.string());
    }
    return bytes;
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    auto tmp = path;
    tmp += ".part";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            fail(ErrorKind::Io, "cannot open " + tmp.string() + " for writing");
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            fail(ErrorKind::Io, "write error on " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        fail(ErrorKind::Io, "cannot move " + tmp.string() + " into place: " + ec.message());
    }
}

void write_container(const Container& c, const std::filesystem::path& path) { write_file(path, encode(c)); }

Container read_container(const std::filesystem::path& path) {
    try {
        return decode(read_file(path));
    } catch (const Error& e) {
        fail(e.kind(), path.string() + ": " + std::string(e.what()));
    }
}

void write_coeffs(const CoefficientMatrix& m, const std::filesystem::path& path) {
    Container c;
    c.kind = ContainerKind::CoefficientMatrix;
    c.rows = m.n();
    c.cols = m.d();
    c.payload.assign(m.values.data(), m.values.data() + m.values.size());
    c.metadata = m.metadata;
    c.metadata["basis_id"] = m.basis_id;
    c.metadata["dataset_id"] = m.dataset_id;
    write_container(c, path);
}

CoefficientMatrix read_coeffs(const std::filesystem::path& path) {
    Container c = expect_kind(read_container(path), ContainerKind::CoefficientMatrix, path);
    CoefficientMatrix m;
    m.values = Eigen::Map<const RowMatrix>(c.payload.data(), static_cast<Eigen::Index>(c.rows),
                                           static_cast<Eigen::Index>(c.cols));
    if (auto it = c.metadata.find("basis_id"); it != c.metadata.end()) {
        m.basis_id = it->second;
        c.metadata.erase(it);
    }
    if (auto it = c.metadata.find("dataset_id"); it != c.metadata.end()) {
        m.dataset_id = it->second;
        c.metadata.erase(it);
    }
    m.metadata = std::move(c.metadata);
    return m;
}

void write_matrix(const Matrix& m, const std::filesystem::path& path,
                  const std::map<std::string, std::string>& metadata) {
    Container c;
    c.kind = ContainerKind::Matrix;
    c.rows = static_cast<std::uint64_t>(m.rows());
    c.cols = static_cast<std::uint64_t>(m.cols());
    const RowMatrix rm = m;
    c.payload.assign(rm.data(), rm.data() + rm.size());
    c.metadata = metadata;
    write_container(c, path);
}

Matrix read_matrix(const std::filesystem::path& path, std::map<std::string, std::string>* metadata) {
    Container c = expect_kind(read_container(path), ContainerKind::Matrix, path);
    if (metadata != nullptr) {
        *metadata = std::move(c.metadata);
    }
    return Eigen::Map<const RowMatrix>(c.payload.data(), static_cast<Eigen::Index>(c.rows),
                                       static_cast<Eigen::Index>(c.cols));
}

void write_vector(const Vector& v, const std::filesystem::path& path,
                  const std::map<std::string, std::string>& metadata) {
    Container c;
    c.kind = ContainerKind::Vector;
    c.rows = static_cast<std::uint64_t>(v.size());
    c.cols = 1;
    c.payload.assign(v.data(), v.data() + v.size());
    c.metadata = metadata;
    write_container(c, path);
}

Vector read_vector(const std::filesystem::path& path, std::map<std::string, std::string>* metadata) {
    Container c = expect_kind(read_container(path), ContainerKind::Vector, path);
    if (metadata != nullptr) {
        *metadata = std::move(c.metadata);
    }
    return Eigen::Map<const Vector>(c.payload.data(), static_cast<Eigen::Index>(c.rows));
}

}  // namespace basisgen

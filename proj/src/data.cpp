#include "ttts/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <numbers>

#include "ttts/random.hpp"

namespace ttts {

SyntheticData gen_synthetic(const Dims& dims, const Dims& ranks, double noise_std, std::uint64_t seed, Index cap) {
    if (!(noise_std >= 0.0)) throw DomainError("gen_synthetic: noise_std must be >= 0");
    TT truth = random_tt(dims, ranks, derive_seed(seed, Stream::truth));
    Tensor full = tt_full(truth, cap);
    if (noise_std == 0.0) return {std::move(full), std::move(truth)};
    Rng rng = make_rng(seed, Stream::noise);
    std::normal_distribution<double> normal(0.0, noise_std);
    Eigen::VectorXd data = full.data();
    for (Index i = 0; i < data.size(); ++i) data[i] += normal(rng);
    return {Tensor(dims, std::move(data)), std::move(truth)};
}

Tensor gen_function_tensor(FunctionKind kind, Index count, Dims dims) {
    if (count < 1) throw DomainError("gen_function_tensor: count must be >= 1");
    if (dims_product(dims) != count)
        throw DomainError("gen_function_tensor: dims " + dims_string(dims) + " do not hold " + std::to_string(count) +
                          " values");
    Eigen::VectorXd values(count);
    const double pi = std::numbers::pi;
    for (Index i = 0; i < count; ++i) {
        if (kind == FunctionKind::sinc) {
            const double x = count == 1 ? -5.0 : -5.0 + 10.0 * static_cast<double>(i) / static_cast<double>(count - 1);
            values[i] = x == 0.0 ? 1.0 : std::sin(pi * x) / (pi * x);
        } else {
            const double x = static_cast<double>(i + 1) / static_cast<double>(count);
            values[i] = std::sin(4.0 / x) * std::cos(x * x);
        }
    }
    return Tensor(std::move(dims), std::move(values));
}

double psnr(const Tensor& a, const Tensor& approx, PsnrVariant variant) {
    if (a.dims() != approx.dims())
        throw DomainError("psnr: shapes " + dims_string(a.dims()) + " and " + dims_string(approx.dims()) + " differ");
    if (a.order() < 3) throw DomainError("psnr: expects a tensor of order >= 3");
    const Index slices = a.dims().back();
    const Index slice_size = a.size() / slices;
    double total = 0.0;
    for (Index s = 0; s < slices; ++s) {
        const double sse = (a.data().segment(s * slice_size, slice_size) - approx.data().segment(s * slice_size, slice_size))
                               .squaredNorm();
        if (sse == 0.0) return std::numeric_limits<double>::infinity();
        const double err = variant == PsnrVariant::per_slice_mse ? sse / static_cast<double>(slice_size) : sse;
        total += 10.0 * std::log10(255.0 * 255.0 / err);
    }
    return total / static_cast<double>(slices);
}

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put_le(std::string& out, T value) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(bytes), std::end(bytes));
    out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::string_view bytes, std::size_t& pos, const char* what) {
    if (bytes.size() - pos < sizeof(T)) throw FormatError(std::string("DTF: truncated while reading ") + what);
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, bytes.data() + pos, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(buf), std::end(buf));
    pos += sizeof(T);
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

constexpr std::string_view dtf_magic = "DTF1";

}  // namespace

std::string encode_dtf(const Tensor& a) {
    std::string out;
    out.reserve(8 + 8 * a.dims().size() + 8 * static_cast<std::size_t>(a.size()));
    out.append(dtf_magic);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(a.order()));
    for (Index n : a.dims()) put_le<std::uint64_t>(out, static_cast<std::uint64_t>(n));
    for (Index i = 0; i < a.size(); ++i) put_le<double>(out, a[i]);
    return out;
}

Tensor decode_dtf(std::string_view bytes) {
    if (bytes.size() < 4 || bytes.substr(0, 4) != dtf_magic) throw FormatError("DTF: bad magic or version");
    std::size_t pos = 4;
    const auto order = get_le<std::uint32_t>(bytes, pos, "order");
    if (order == 0) throw FormatError("DTF: order must be at least 1");
    Dims dims;
    std::uint64_t total = 1;
    for (std::uint32_t k = 0; k < order; ++k) {
        const auto n = get_le<std::uint64_t>(bytes, pos, "dims");
        if (n == 0) throw FormatError("DTF: zero dimension");
        if (n > static_cast<std::uint64_t>(std::numeric_limits<Index>::max()) ||
            total > static_cast<std::uint64_t>(std::numeric_limits<Index>::max()) / n)
            throw FormatError("DTF: dimension product overflows");
        total *= n;
        dims.push_back(static_cast<Index>(n));
    }
    if ((bytes.size() - pos) / 8 < total) throw FormatError("DTF: truncated data section");
    if (bytes.size() - pos != total * 8) throw FormatError("DTF: trailing bytes after data section");
    Eigen::VectorXd data(static_cast<Index>(total));
    for (Index i = 0; i < data.size(); ++i) data[i] = get_le<double>(bytes, pos, "data");
    return Tensor(std::move(dims), std::move(data));
}

void save_dtf(const Tensor& a, const std::filesystem::path& path) {
    const std::string bytes = encode_dtf(a);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

Tensor load_dtf(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_dtf(bytes);
}

}  // namespace ttts

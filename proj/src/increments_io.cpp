#include "bgidx/errors.hpp"
#include "bgidx/simulate.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

namespace bgidx::sim {

namespace {

constexpr std::array<char, 8> kMagic{'B', 'G', 'I', 'N', 'C', 'R', '0', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
    std::array<char, 8> bytes{};
    for (int i = 0; i < 8; ++i) {
        bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFFU);
    }
    out.write(bytes.data(), bytes.size());
}

std::uint64_t get_u64(std::istream& in) {
    std::array<unsigned char, 8> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!in) {
        throw ConfigError("increment file truncated");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    }
    return v;
}

}  // namespace

void write_increments(std::ostream& out, const IncrementSeries& series) {
    out.write(kMagic.data(), kMagic.size());
    put_u64(out, series.increments.size());
    put_u64(out, std::bit_cast<std::uint64_t>(series.delta));
    for (double x : series.increments) {
        put_u64(out, std::bit_cast<std::uint64_t>(x));
    }
    if (!out) {
        throw NumericalError("failed writing increment file");
    }
}

IncrementSeries read_increments(std::istream& in) {
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) {
        throw ConfigError("not an increment file (bad magic)");
    }
    const std::uint64_t n = get_u64(in);
    IncrementSeries series;
    series.delta = std::bit_cast<double>(get_u64(in));
    if (!(series.delta > 0.0)) {
        throw ConfigError("increment file has nonpositive delta");
    }
    series.increments.resize(n);
    for (double& x : series.increments) {
        x = std::bit_cast<double>(get_u64(in));
    }
    return series;
}

}  // namespace bgidx::sim
